//! Driving the command line from code: build an index, query it, and emit benchmark CSVs.
//!
//! cargo run --example bench_cli

use std::fs;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use subseq::sequence::serialize_dataset;
use subseq::synth::random_strings;

fn run(args: &[&str]) -> i32 {
    let mut out = std::io::stdout();
    let mut err = std::io::stderr();
    println!("$ subseq {}", args.join(" "));
    subseq::cli::run(std::iter::once("subseq").chain(args.iter().copied()), &mut out, &mut err)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("subseq-bench-example");
    fs::create_dir_all(&dir)?;
    let db = dir.join("db.txt");
    let ds = random_strings(&mut ChaCha8Rng::seed_from_u64(4), 30, 100..=200, 4);
    fs::write(&db, serialize_dataset(&ds))?;
    let query = dir.join("q.txt");
    let first = ds.sequences()[0].elements()[10..50].iter().map(|e| e.to_string()).collect::<String>();
    fs::write(&query, format!("{first}\n"))?;
    let cfg = dir.join("run.cfg");
    fs::write(&cfg, format!("dataset={}\ndistance=levenshtein\nlambda=16\nlambda0=1\nseed=7\nout_dir={}\n", db.display(), dir.display()))?;

    let (cfg, idx, query) = (cfg.to_str().unwrap(), dir.join("db.idx"), query.to_str().unwrap());
    let idx = idx.to_str().unwrap();
    assert_eq!(run(&["build", "--config", cfg, "-o", idx]), 0);
    assert_eq!(run(&["query", "--index", idx, "--queries", query, "--type", "2", "--eps", "2"]), 0);
    assert_eq!(run(&["bench", "--config", cfg, "--queries", "20"]), 0);
    print!("{}", fs::read_to_string(dir.join("consecutive.csv"))?);
    assert_eq!(run(&["selftest", "--config", cfg, "--index", idx]), 0);
    Ok(())
}
