//! Distance computations per range query: reference net vs maximum-variance references vs a
//! linear scan, on clustered random walks under ERP.
//!
//! cargo run --release --example pruning_benchmark [-- out.csv]

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use subseq::baselines::{compare_pruning, space_matched_k, write_pruning_csv, MvIndex};
use subseq::distance::{DistanceKind, DistanceSpec};
use subseq::matching::build_index;
use subseq::refnet::{NetConfig, ObjectId};
use subseq::segment::SegmentationParams;
use subseq::sequence::{Alphabet, Element};
use subseq::synth::clustered_walks;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let ds = clustered_walks(&mut rng, 40, 400, 2, 8, 0.3);
    let d = DistanceSpec::new(DistanceKind::Erp, Alphabet::Vectors(2));
    let idx = build_index(ds, SegmentationParams::new(16, 0)?, d, NetConfig::default())?;
    let objects: Vec<Vec<Element>> =
        (0..idx.windows().len()).map(|i| idx.net().payload(i as ObjectId).unwrap().to_vec()).collect();

    let max = (0..1000)
        .map(|_| d.eval(objects.choose(&mut rng).unwrap(), objects.choose(&mut rng).unwrap()).unwrap())
        .fold(0.0, f64::max);
    let radii: Vec<f64> = [0.01, 0.02, 0.05, 0.1, 0.2, 0.4].iter().map(|f| f * max).collect();
    let queries: Vec<Vec<Element>> = objects.choose_multiple(&mut rng, 50).cloned().collect();

    let k = space_matched_k(idx.net());
    let mvs = [k, 10 * k].iter().map(|&k| MvIndex::build(&objects, k, 1000, 1, d)).collect::<Result<Vec<_>, _>>()?;
    let rows = compare_pruning(&objects, &queries, &radii, idx.net(), &mvs)?;

    println!("{} windows, sampled max distance {max:.1}", objects.len());
    println!("{:>8} {:>8} {:>9}", "radius", "method", "computed");
    for r in &rows {
        println!("{:>8.2} {:>8} {:>8.1}%", r.radius, r.method, 100.0 * (1.0 - r.alpha));
    }
    if let Some(path) = std::env::args().nth(1) {
        let mut w = csv::Writer::from_path(&path)?;
        write_pruning_csv(&mut w, &rows)?;
        println!("wrote {path}");
    }
    Ok(())
}
