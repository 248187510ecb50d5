//! The three query types on a planted motif.
//!
//! cargo run --example subsequence_queries

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use subseq::distance::{DistanceKind, DistanceSpec};
use subseq::matching::{build_index, query_type1, query_type2, query_type3, Type3Options};
use subseq::refnet::NetConfig;
use subseq::segment::SegmentationParams;
use subseq::sequence::Alphabet;
use subseq::synth::{plant_motif, Noise};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let plant = plant_motif(&mut rng, Alphabet::Symbols, 4, 20, 300, 60, 24, Noise::Edits(2));
    println!("planted: query {:?} ~ sequence {} {:?}", plant.sq, plant.seq, plant.sx);

    let d = DistanceSpec::new(DistanceKind::Levenshtein, Alphabet::Symbols);
    let params = SegmentationParams::new(20, 2)?;
    let idx = build_index(plant.dataset, params, d, NetConfig::default())?;
    println!("{} windows indexed with {} distance computations", idx.windows().len(), idx.build_computations());

    let t1 = query_type1(&idx, &plant.query, 2.0, 2)?;
    println!("type I: {} pairs within 2 ({} segments, {} net computations, {} verified)",
        t1.result.len(), t1.stats.segments, t1.stats.filter_computations, t1.stats.verified_pairs);

    if let Some(p) = query_type2(&idx, &plant.query, 2.0, 2)?.result {
        println!("type II: longest {:?} ~ {} {:?} at distance {}", p.sq, p.seq, p.sx, p.distance);
    }

    let t3 = query_type3(&idx, &plant.query, 2, Type3Options::default())?;
    let p = t3.pair;
    println!("type III: closest {:?} ~ {} {:?} at distance {} (first hit {:.2}, {} tiers of {:.3})",
        p.sq, p.seq, p.sx, p.distance, t3.first_hit, t3.tiers, t3.increment);
    Ok(())
}
