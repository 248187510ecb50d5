//! How a database is cut into windows and a query into segments.
//!
//! cargo run --example segmentation

use subseq::matching::{expand_candidate, SegmentMatch};
use subseq::segment::{extract_query_segments, partition_windows, segment_count, SegmentationParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = SegmentationParams::new(20, 2)?;
    println!("lambda {} lambda0 {} -> window length {}, segment lengths {:?}", p.lambda(), p.lambda0(), p.window(), p.segment_lengths());

    let windows = partition_windows(0, 47, &p);
    let spans: Vec<String> = windows.iter().map(|w| format!("{}..{}", w.span().start, w.span().end)).collect();
    println!("47 elements -> {} windows: {} (tail left uncovered)", windows.len(), spans.join(" "));

    let segments = extract_query_segments(30, &p);
    assert_eq!(segments.len(), segment_count(30, &p));
    println!("query of 30 -> {} segments, first {:?}, last {:?}", segments.len(), segments[0].span, segments.last().unwrap().span);

    // Where the verification step looks around one hit.
    let hit = SegmentMatch { segment: segments[40].span, window: windows[2], distance: Some(1.0) };
    let r = expand_candidate(&hit, &p, 30, 47);
    println!("hit {:?} x window {:?}", hit.segment, hit.window.span());
    println!("  query starts {:?}, ends {:?}", r.sq_start, r.sq_end);
    println!("  database starts {:?}, ends {:?}", r.sx_start, r.sx_end);
    Ok(())
}
