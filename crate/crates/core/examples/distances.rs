//! The six sequence distances, plus the property checks that decide which may back an index.
//!
//! cargo run --example distances

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use subseq::distance::{check_consistency, search_triangle_violation, DistanceKind, DistanceSpec};
use subseq::sequence::{Alphabet, Element};

fn text(s: &str) -> Vec<Element> {
    s.chars().map(Element::Symbol).collect()
}

fn series(v: &[f64]) -> Vec<Element> {
    v.iter().map(|&x| Element::scalar(x)).collect()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (a, b) = (text("kitten"), text("sitten"));
    for kind in [DistanceKind::Hamming, DistanceKind::Levenshtein] {
        println!("{kind:>11}(kitten, sitten) = {}", DistanceSpec::new(kind, Alphabet::Symbols).eval(&a, &b)?);
    }
    println!("levenshtein(kitten, sitting) = {}", DistanceSpec::new(DistanceKind::Levenshtein, Alphabet::Symbols).eval(&a, &text("sitting"))?);

    let (q, x) = (series(&[1.0, 2.0, 3.0, 3.0]), series(&[1.0, 2.0, 2.0, 4.0]));
    for kind in [DistanceKind::Euclidean, DistanceKind::Erp, DistanceKind::Dfd, DistanceKind::Dtw] {
        let d = DistanceSpec::new(kind, Alphabet::Vectors(1));
        println!("{kind:>11}(q, x) = {:.4}", d.eval(&q, &x)?);
    }
    let erp = DistanceSpec::new(DistanceKind::Erp, Alphabet::Vectors(1)).with_gap(Element::scalar(2.0));
    println!("erp with gap 2 = {:.4}", erp.eval(&q, &x)?);

    // DTW collapses repeats, which is why it cannot back an index.
    let dtw = DistanceSpec::new(DistanceKind::Dtw, Alphabet::Vectors(1));
    println!("dtw(111222333, 123) = {}", dtw.eval(&series(&[1., 1., 1., 2., 2., 2., 3., 3., 3.]), &series(&[1., 2., 3.]))?);
    if let Some(v) = search_triangle_violation(&dtw, &mut ChaCha8Rng::seed_from_u64(0), 10_000, 4, 3) {
        let [ac, ab, bc] = [v.values[0], v.values[1], v.values[2]];
        println!("dtw triangle counterexample: d(a,c) = {ac} > d(a,b) + d(b,c) = {}", ab + bc);
        for (name, w) in ["a", "b", "c"].iter().zip(&v.witnesses) {
            println!("  {name} = [{}]", w.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(", "));
        }
    }

    let lev = DistanceSpec::new(DistanceKind::Levenshtein, Alphabet::Symbols);
    let found = check_consistency(&lev, &text("abcabd"), &text("abdabc"))?;
    println!("levenshtein consistency violations on one pair: {}", found.len());
    Ok(())
}
