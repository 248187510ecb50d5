//! Building, querying, editing and saving a reference net over words.
//!
//! cargo run --example reference_net

use subseq::distance::{DistanceKind, DistanceSpec};
use subseq::refnet::{NetConfig, ReferenceNet};
use subseq::sequence::{Alphabet, Element};

const WORDS: &[&str] = &[
    "kitten", "sitting", "mitten", "bitten", "written", "smitten", "knitting", "sitter", "fitting", "kitchen",
    "chicken", "thicken", "stick", "sticky", "ticket", "pocket", "rocket", "socket", "locket", "jacket",
];

fn word(s: &str) -> Vec<Element> {
    s.chars().map(Element::Symbol).collect()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let d = DistanceSpec::new(DistanceKind::Levenshtein, Alphabet::Symbols);
    let mut net = ReferenceNet::new(d, NetConfig::new(1.0, Some(3))?)?;
    for (id, w) in WORDS.iter().enumerate() {
        net.insert(id as u32, word(w))?;
    }
    let s = net.stats();
    println!("{} words over {} levels, {} list entries, root {:?}", s.nodes, s.levels, s.entries, net.root_id().map(|r| WORDS[r as usize]));

    for eps in [1.0, 2.0, 3.0] {
        let r = net.range_query(&word("mitten"), eps);
        let hits: Vec<&str> = r.ids().iter().map(|&i| WORDS[i as usize]).collect();
        println!("within {eps} of mitten ({} distance computations): {hits:?}", r.computations);
    }

    net.delete(0)?;
    net.delete(net.root_id().unwrap())?;
    assert!(net.validate().is_clean());
    println!("after two deletions: {} words, root {:?}", net.len(), net.root_id().map(|r| WORDS[r as usize]));

    let mut saved = Vec::new();
    net.write_to(&mut saved, None)?;
    let (loaded, _) = ReferenceNet::read_from(std::str::from_utf8(&saved)?, None)?;
    println!("saved {} bytes, reloaded {} words", saved.len(), loaded.len());

    // DTW is not a metric, so the net refuses it.
    let dtw = DistanceSpec::new(DistanceKind::Dtw, Alphabet::Symbols);
    println!("dtw: {}", ReferenceNet::new(dtw, NetConfig::default()).unwrap_err());
    Ok(())
}
