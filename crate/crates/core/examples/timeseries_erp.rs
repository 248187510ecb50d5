//! Subsequence search over 2-D trajectories with ERP, and the filter's blind spot.
//!
//! cargo run --example timeseries_erp

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use subseq::distance::{DistanceKind, DistanceSpec};
use subseq::matching::{brute_force_oracle, build_index, query_type1, query_type3, OracleAnswer, OracleQuery, Type3Options};
use subseq::refnet::NetConfig;
use subseq::segment::SegmentationParams;
use subseq::sequence::{Alphabet, Dataset, Element, Sequence};
use subseq::synth::{plant_motif, Noise};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let plant = plant_motif(&mut rng, Alphabet::Vectors(2), 10, 10, 200, 50, 20, Noise::Additive(0.3));
    let d = DistanceSpec::new(DistanceKind::Erp, Alphabet::Vectors(2));
    let idx = build_index(plant.dataset.clone(), SegmentationParams::new(16, 1)?, d, NetConfig::default())?;
    let t3 = query_type3(&idx, &plant.query, 1, Type3Options::default())?;
    println!("planted {:?} ~ {} {:?}", plant.sq, plant.seq, plant.sx);
    println!("closest {:?} ~ {} {:?}, erp {:.3}", t3.pair.sq, t3.pair.seq, t3.pair.sx, t3.pair.distance);

    // Elements equal to the gap are free to insert or delete, so a pair can match while no
    // window matches any segment of nearby length. The filter then misses it.
    let s = |v: &[f64]| v.iter().map(|&x| Element::scalar(x)).collect::<Vec<_>>();
    let d1 = DistanceSpec::new(DistanceKind::Erp, Alphabet::Vectors(1));
    let ds = Dataset::new(Alphabet::Vectors(1), vec![Sequence::scalars("x", &[1., 2., 3., 4., 0., 0., 5., 6.])])?;
    let q = s(&[1., 2., 0., 0., 3., 4., 5., 6.]);
    let idx = build_index(ds.clone(), SegmentationParams::new(8, 0)?, d1, NetConfig::default())?;
    let found = query_type1(&idx, &q, 0.0, 0)?.result.len();
    let OracleAnswer::All(truth) = brute_force_oracle(&ds, &q, &d1, 8, 0, OracleQuery::All { eps: 0.0 })? else {
        unreachable!()
    };
    println!("zero-gap case: index finds {found} pair(s), brute force finds {}", truth.len());
    Ok(())
}
