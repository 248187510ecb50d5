//! Loading strings and time series, and generating synthetic data.
//!
//! cargo run --example datasets

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use subseq::sequence::{parse_string_dataset, parse_timeseries_dataset, serialize_dataset, Span};
use subseq::synth::{clustered_walks, plant_motif, Noise};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let fasta = ">p1 kinase fragment\nMKVLAAGIVG\nLLLAQ\n>p2\nMKVLSAGIVA\n";
    let proteins = parse_string_dataset(fasta)?;
    for s in proteins.sequences() {
        println!("{:>4}  len {:>2}  {}", s.id(), s.len(), s.slice(Span::new(1, 5)).iter().map(|e| e.to_string()).collect::<String>());
    }

    // One row per sample: id, then one value per dimension.
    let csv = "walk,0.0,1.0\nwalk,0.5,1.5\nwalk,1.0,1.0\nother,3,3\n";
    let traj = parse_timeseries_dataset(csv, 2)?;
    println!("{} series, {} samples, alphabet {}", traj.len(), traj.total_elements(), traj.alphabet());

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let walks = clustered_walks(&mut rng, 3, 5, 1, 2, 0.1);
    print!("{}", serialize_dataset(&walks));

    let plant = plant_motif(&mut rng, proteins.alphabet(), 4, 3, 40, 24, 10, Noise::Edits(1));
    let x = &plant.dataset.sequences()[plant.seq as usize];
    let show = |s: &[subseq::sequence::Element]| s.iter().map(|e| e.to_string()).collect::<String>();
    println!("motif in query  {:?}: {}", plant.sq, show(&plant.query[plant.sq.range()]));
    println!("copy in {:>7} {:?}: {}", x.id(), plant.sx, show(x.slice(plant.sx)));
    Ok(())
}
