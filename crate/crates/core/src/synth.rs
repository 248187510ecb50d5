//! Seeded synthetic datasets: random strings, clustered random walks and planted motifs.

use rand::Rng;

use crate::sequence::{Alphabet, Dataset, Element, Point, Sequence, Span};

/// Symbol `i` of a synthetic alphabet: `a..z` then `A..Z`.
pub fn symbol(i: usize) -> char {
    assert!(i < 52, "synthetic alphabets hold at most 52 symbols");
    if i < 26 {
        (b'a' + i as u8) as char
    } else {
        (b'A' + (i - 26) as u8) as char
    }
}

/// `len` random elements: symbols from the first `values` letters, or vectors with integer
/// coordinates in `0..values`.
pub fn random_elements<R: Rng>(rng: &mut R, alphabet: Alphabet, len: usize, values: usize) -> Vec<Element> {
    (0..len)
        .map(|_| match alphabet {
            Alphabet::Symbols => Element::Symbol(symbol(rng.gen_range(0..values))),
            Alphabet::Vectors(d) => {
                let coords: Vec<f64> = (0..d).map(|_| rng.gen_range(0..values) as f64).collect();
                Element::Vector(Point::new(&coords).expect("finite coordinates"))
            }
        })
        .collect()
}

/// `count` uniform random strings over `alphabet_size` letters with lengths in `len`.
pub fn random_strings<R: Rng>(
    rng: &mut R,
    count: usize,
    len: std::ops::RangeInclusive<usize>,
    alphabet_size: usize,
) -> Dataset {
    let seqs = (0..count)
        .map(|i| {
            let n = rng.gen_range(len.clone());
            let text: String = (0..n).map(|_| symbol(rng.gen_range(0..alphabet_size))).collect();
            Sequence::symbols(i.to_string(), &text)
        })
        .collect();
    Dataset::new(Alphabet::Symbols, seqs).expect("symbol sequences")
}

fn walk<R: Rng>(rng: &mut R, len: usize, dims: usize, step: f64) -> Vec<Vec<f64>> {
    let mut pos = vec![0.0; dims];
    (0..len)
        .map(|_| {
            for p in pos.iter_mut() {
                *p += rng.gen_range(-step..=step);
            }
            pos.clone()
        })
        .collect()
}

/// Random walks grouped around `clusters` prototype walks. Each series is its prototype plus
/// an independent walk with steps scaled by `spread`, so small `spread` gives tight clusters.
pub fn clustered_walks<R: Rng>(
    rng: &mut R,
    count: usize,
    len: usize,
    dims: usize,
    clusters: usize,
    spread: f64,
) -> Dataset {
    let prototypes: Vec<Vec<Vec<f64>>> = (0..clusters.max(1)).map(|_| walk(rng, len, dims, 1.0)).collect();
    let seqs = (0..count)
        .map(|i| {
            let proto = &prototypes[rng.gen_range(0..prototypes.len())];
            let noise = walk(rng, len, dims, spread);
            let elements = proto
                .iter()
                .zip(&noise)
                .map(|(p, n)| {
                    let c: Vec<f64> = p.iter().zip(n).map(|(a, b)| a + b).collect();
                    Element::Vector(Point::new(&c).expect("finite coordinates"))
                })
                .collect();
            Sequence::new(i.to_string(), Alphabet::Vectors(dims as u8), elements).expect("vector sequence")
        })
        .collect();
    Dataset::new(Alphabet::Vectors(dims as u8), seqs).expect("vector sequences")
}

/// A query and database sharing one planted motif.
#[derive(Clone, Debug)]
pub struct PlantedMotif {
    pub dataset: Dataset,
    pub query: Vec<Element>,
    /// Database sequence holding the noisy copy.
    pub seq: u32,
    pub sq: Span,
    pub sx: Span,
}

/// How the database copy of a motif is perturbed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Noise {
    /// Random substitutions, insertions and deletions, this many in total (symbols).
    Edits(usize),
    /// Uniform additive noise in `[-a, a]` per coordinate (vectors).
    Additive(f64),
}

/// Plants a random motif of length `motif_len` in a random query and a perturbed copy in one of
/// `db_count` random database sequences. Backgrounds are drawn from `values` symbols or
/// integer levels.
#[allow(clippy::too_many_arguments)]
pub fn plant_motif<R: Rng>(
    rng: &mut R,
    alphabet: Alphabet,
    values: usize,
    db_count: usize,
    db_len: usize,
    query_len: usize,
    motif_len: usize,
    noise: Noise,
) -> PlantedMotif {
    assert!(motif_len <= query_len && motif_len <= db_len, "motif must fit");
    let motif = random_elements(rng, alphabet, motif_len, values);
    let mut copy = motif.clone();
    match noise {
        Noise::Edits(n) => {
            for _ in 0..n {
                let pos = rng.gen_range(0..copy.len());
                match rng.gen_range(0..3) {
                    0 => copy[pos] = random_elements(rng, alphabet, 1, values)[0],
                    1 => copy.insert(pos, random_elements(rng, alphabet, 1, values)[0]),
                    _ if copy.len() > 1 => {
                        copy.remove(pos);
                    }
                    _ => {}
                }
            }
        }
        Noise::Additive(a) => {
            for e in copy.iter_mut() {
                if let Element::Vector(p) = e {
                    let c: Vec<f64> = p.coords().iter().map(|v| v + rng.gen_range(-a..=a)).collect();
                    *p = Point::new(&c).expect("finite coordinates");
                }
            }
        }
    }

    let mut query = random_elements(rng, alphabet, query_len, values);
    let q_at = rng.gen_range(0..=query_len - motif_len);
    query.splice(q_at..q_at + motif_len, motif);

    let seq = rng.gen_range(0..db_count.max(1));
    let mut seqs = Vec::with_capacity(db_count.max(1));
    let mut sx = Span::new(1, copy.len());
    for i in 0..db_count.max(1) {
        let mut x = random_elements(rng, alphabet, db_len, values);
        if i == seq {
            let room = db_len.saturating_sub(copy.len());
            let at = rng.gen_range(0..=room);
            let end = (at + copy.len()).min(x.len());
            x.splice(at..end, copy.iter().copied());
            sx = Span::new(at + 1, at + copy.len());
        }
        seqs.push(Sequence::new(i.to_string(), alphabet, x).expect("generated sequence"));
    }
    PlantedMotif {
        dataset: Dataset::new(alphabet, seqs).expect("generated dataset"),
        query,
        seq: seq as u32,
        sq: Span::new(q_at + 1, q_at + motif_len),
        sx,
    }
}

/// `len` consecutive elements from a random position of a random sequence at least that long.
pub fn random_excerpt<R: Rng>(dataset: &Dataset, len: usize, rng: &mut R) -> Option<Vec<Element>> {
    let eligible: Vec<&Sequence> = dataset.sequences().iter().filter(|s| s.len() >= len).collect();
    if eligible.is_empty() {
        return None;
    }
    let s = eligible[rng.gen_range(0..eligible.len())];
    let start = rng.gen_range(0..=s.len() - len);
    Some(s.elements()[start..start + len].to_vec())
}
