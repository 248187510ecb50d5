//! Acceptance suite. Runs without the libtest harness and prints one line per criterion:
//!
//! ```text
//! criterion  3 PASS dp-vs-oracle: ... (4.1s)
//! ```
//!
//! Positional arguments filter criteria by name; the process fails if any selected criterion
//! fails.

mod common;

use std::collections::BTreeMap;
use std::fs;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use subseq::baselines::{compare_pruning, space_matched_k, MvIndex};
use subseq::cli::{consecutive_stats, max_segment_window_distance};
use subseq::distance::{
    check_consistency, check_metric_axioms, search_triangle_violation, DistanceKind, DistanceSpec, TOLERANCE,
};
use subseq::matching::{
    brute_force_oracle, build_index, candidate_pairs, query_type1, query_type2, query_type3, OracleAnswer,
    OracleQuery, SubseqIndex, SubsequencePair, Type3Options,
};
use subseq::refnet::{NetConfig, ObjectId, ReferenceNet};
use subseq::segment::SegmentationParams;
use subseq::sequence::{Alphabet, Dataset, Element, Sequence};
use subseq::synth::{clustered_walks, plant_motif, random_excerpt, random_strings, Noise};

use common::*;

type Outcome = Result<String, String>;

const METRICS: [DistanceKind; 5] = [
    DistanceKind::Euclidean,
    DistanceKind::Hamming,
    DistanceKind::Levenshtein,
    DistanceKind::Erp,
    DistanceKind::Dfd,
];

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn symbolic(kind: DistanceKind) -> bool {
    matches!(kind, DistanceKind::Hamming | DistanceKind::Levenshtein)
}

fn spec(kind: DistanceKind) -> DistanceSpec {
    let alphabet = if symbolic(kind) { Alphabet::Symbols } else { Alphabet::Vectors(1) };
    DistanceSpec::new(kind, alphabet)
}

/// Random input for `kind`: 3-letter text, or real-valued scalar series.
fn random_input(rng: &mut ChaCha8Rng, kind: DistanceKind, len: usize) -> Vec<Element> {
    if symbolic(kind) {
        random_text(rng, len, 3)
    } else {
        (0..len).map(|_| Element::scalar(rng.gen_range(-3.0..3.0))).collect()
    }
}

fn lengths(rng: &mut ChaCha8Rng, kind: DistanceKind, max: usize) -> (usize, usize) {
    let lo = usize::from(!kind.accepts_empty());
    let a = rng.gen_range(lo.max(1)..=max);
    if kind.requires_equal_length() {
        (a, a)
    } else {
        (rng.gen_range(lo..=max), rng.gen_range(lo..=max))
    }
}

fn consistency() -> Outcome {
    let mut notes = Vec::new();
    for kind in DistanceKind::ALL {
        let d = spec(kind);
        let mut r = rng(100 + kind as u64);
        let started = Instant::now();
        for trial in 0..1000 {
            let (lq, lx) = lengths(&mut r, kind, 12);
            let (q, x) = (random_input(&mut r, kind, lq), random_input(&mut r, kind, lx));
            let found = check_consistency(&d, &q, &x).map_err(|e| format!("{kind}: {e}"))?;
            if let Some(v) = found.first() {
                return Err(format!("{kind} trial {trial}: {:?} values {:?}", v.witnesses, v.values));
            }
        }
        notes.push(format!("{kind} {:.1}s", started.elapsed().as_secs_f64()));
    }
    Ok(format!("1000 pairs per distance, no violations [{}]", notes.join(", ")))
}

fn metric_axioms() -> Outcome {
    for kind in METRICS {
        let d = spec(kind);
        let mut r = rng(200 + kind as u64);
        let triples: Vec<[Vec<Element>; 3]> = (0..10_000)
            .map(|_| {
                let (a, _) = lengths(&mut r, kind, 8);
                [0, 1, 2].map(|_| {
                    let len = if kind.requires_equal_length() { a } else { lengths(&mut r, kind, 8).0 };
                    random_input(&mut r, kind, len)
                })
            })
            .collect();
        let found = check_metric_axioms(&d, triples.iter().map(|[a, b, c]| (a.as_slice(), b.as_slice(), c.as_slice())))
            .map_err(|e| format!("{kind}: {e}"))?;
        if let Some(v) = found.first() {
            return Err(format!("{kind}: {:?} {:?} values {:?}", v.kind, v.witnesses, v.values));
        }
    }
    let dtw = DistanceSpec::new(DistanceKind::Dtw, Alphabet::Vectors(1));
    let witness = search_triangle_violation(&dtw, &mut rng(299), 100_000, 4, 3)
        .ok_or("no dtw triangle violation within 100000 trials")?;
    if !witness.replay(&dtw) {
        return Err("dtw witness does not replay".into());
    }
    let v = &witness.values;
    Ok(format!(
        "10000 triples x 5 metrics clean (tolerance {TOLERANCE:e}); dtw violation d(a,c)={} > {} + {}",
        v[0], v[1], v[2]
    ))
}

fn dp_vs_oracle() -> Outcome {
    let text = all_sequences(Alphabet::Symbols, 3, 5);
    let series = all_sequences(Alphabet::Vectors(1), 3, 5);
    let mut compared = BTreeMap::new();
    for kind in DistanceKind::ALL {
        let d = spec(kind);
        let inputs = if symbolic(kind) { &text } else { &series };
        let exact = matches!(kind, DistanceKind::Hamming | DistanceKind::Levenshtein);
        let mut count = 0usize;
        for q in inputs {
            for x in inputs {
                if d.check(q, x).is_err() {
                    continue;
                }
                let want = match kind {
                    DistanceKind::Euclidean => direct_euclidean(q, x),
                    DistanceKind::Hamming => direct_hamming(q, x),
                    DistanceKind::Levenshtein => script_levenshtein(q, x),
                    DistanceKind::Erp => script_erp(q, x, &d.gap()),
                    DistanceKind::Dfd => coupling_dfd(q, x),
                    DistanceKind::Dtw => coupling_dtw(q, x),
                };
                let got = d.eval(q, x).map_err(|e| e.to_string())?;
                let ok = if exact { got == want } else { (got - want).abs() <= 1e-9 };
                if !ok {
                    return Err(format!("{kind}: {q:?} vs {x:?}: dp {got}, oracle {want}"));
                }
                count += 1;
            }
        }
        compared.insert(kind.name(), count);
    }
    Ok(format!("exhaustive pairs compared: {compared:?}"))
}

fn dtw_anecdote() -> Outcome {
    let digits = |s: &str| scalars(&s.chars().map(|c| f64::from(c.to_digit(10).unwrap())).collect::<Vec<_>>());
    let v = DistanceSpec::new(DistanceKind::Dtw, Alphabet::Vectors(1))
        .eval(&digits("111222333"), &digits("123"))
        .map_err(|e| e.to_string())?;
    if v == 0.0 {
        Ok("dtw(111222333, 123) = 0".into())
    } else {
        Err(format!("dtw(111222333, 123) = {v}"))
    }
}

/// About `windows` windows of length 8 for `kind`: 5-letter random text, or clustered 1-D walks.
fn window_index(kind: DistanceKind, windows: usize, seed: u64) -> SubseqIndex {
    let per_seq = 100;
    let seqs = windows.div_ceil(per_seq);
    let mut r = rng(seed);
    let ds = if symbolic(kind) {
        random_strings(&mut r, seqs, 8 * per_seq..=8 * per_seq, 5)
    } else {
        clustered_walks(&mut r, seqs, 8 * per_seq, 1, 10, 0.3)
    };
    let params = SegmentationParams::new(16, 0).unwrap();
    build_index(ds, params, spec(kind), NetConfig::default()).unwrap()
}

fn payloads(idx: &SubseqIndex) -> Vec<Vec<Element>> {
    (0..idx.windows().len()).map(|i| idx.net().payload(i as ObjectId).unwrap().to_vec()).collect()
}

fn value(e: &Element) -> f64 {
    match e {
        Element::Vector(p) => p.coords()[0],
        Element::Symbol(_) => unreachable!("scalar expected"),
    }
}

/// A perturbed window or, every other trial, a fresh random sequence of the same length.
fn probe(r: &mut ChaCha8Rng, kind: DistanceKind, objects: &[Vec<Element>], trial: usize) -> Vec<Element> {
    let mut q = objects.choose(r).unwrap().clone();
    if trial % 2 == 0 {
        return if symbolic(kind) {
            random_text(r, q.len(), 5)
        } else {
            (0..q.len()).map(|_| Element::scalar(r.gen_range(-10.0..10.0))).collect()
        };
    }
    for _ in 0..r.gen_range(0..3) {
        let i = r.gen_range(0..q.len());
        q[i] = if symbolic(kind) { random_text(r, 1, 5)[0] } else { Element::scalar(value(&q[i]) + r.gen_range(-1.0..1.0)) };
    }
    q
}

fn net_exactness() -> Outcome {
    let mut notes = Vec::new();
    for kind in METRICS {
        let idx = window_index(kind, 5000, 500 + kind as u64);
        let d = *idx.distance();
        let objects = payloads(&idx);
        let mut r = rng(550 + kind as u64);
        let mut evaluated = 0u64;
        for trial in 0..1000 {
            let q = probe(&mut r, kind, &objects, trial);
            let mut sample: Vec<f64> =
                (0..200).map(|_| d.eval(&q, objects.choose(&mut r).unwrap()).unwrap()).collect();
            sample.sort_by(f64::total_cmp);
            let eps = sample[r.gen_range(0..60)];
            let mut got = idx.net().range_query(&q, eps);
            evaluated += got.computations;
            got.hits.sort_by_key(|h| h.id);
            let got: Vec<u32> = got.hits.iter().map(|h| h.id).collect();
            let want = linear_range(&objects, &q, eps, |a, b| d.eval(a, b).unwrap());
            if got != want {
                return Err(format!("{kind} trial {trial} radius {eps}: net {} hits, scan {}", got.len(), want.len()));
            }
        }

        // Churn a small net, validating after every operation.
        let pool: Vec<Vec<Element>> = objects.choose_multiple(&mut r, 400).cloned().collect();
        let mut net = ReferenceNet::new(d, NetConfig::default()).unwrap();
        let mut present: Vec<ObjectId> = Vec::new();
        let mut absent: Vec<ObjectId> = (0..pool.len() as ObjectId).collect();
        for op in 0..10_000 {
            let insert = present.is_empty() || (!absent.is_empty() && r.gen_bool(if present.len() < 100 { 0.7 } else { 0.3 }));
            let (what, id) = if insert {
                let id = absent.swap_remove(r.gen_range(0..absent.len()));
                net.insert(id, pool[id as usize].clone()).map_err(|e| e.to_string())?;
                present.push(id);
                ("insert", id)
            } else {
                let id = present.swap_remove(r.gen_range(0..present.len()));
                net.delete(id).map_err(|e| e.to_string())?;
                absent.push(id);
                ("delete", id)
            };
            let report = net.validate();
            if !report.is_clean() || net.len() != present.len() {
                return Err(format!("{kind} op {op} ({what} {id}): {report}"));
            }
        }
        notes.push(format!("{kind} {:.0}% evaluated", 100.0 * evaluated as f64 / (1000.0 * objects.len() as f64)));
    }
    Ok(format!("1000 trials x 5 metrics match linear scan, 10000 churn ops validated [{}]", notes.join(", ")))
}

fn space_linearity() -> Outcome {
    let mut r = rng(600);
    let ds = clustered_walks(&mut r, 125, 640, 2, 40, 1.0);
    let params = SegmentationParams::new(16, 0).unwrap();
    let windows = subseq::matching::dataset_windows(&ds, &params);
    let mut order: Vec<usize> = (0..windows.len()).collect();
    order.shuffle(&mut r);
    let d = DistanceSpec::new(DistanceKind::Euclidean, Alphabet::Vectors(2));
    let mut net = ReferenceNet::new(d, NetConfig::new(1.0, Some(5)).unwrap()).unwrap();
    let mut points = Vec::new();
    for (n, &w) in order.iter().enumerate() {
        let win = windows[w];
        net.insert(w as ObjectId, ds.sequences()[win.seq as usize].slice(win.span()).to_vec()).unwrap();
        if [1000, 5000, 10_000].contains(&(n + 1)) {
            let s = net.stats();
            if s.nodes != n + 1 {
                return Err(format!("{} windows inserted but {} nodes", n + 1, s.nodes));
            }
            if s.avg_parents > 5.0 {
                return Err(format!("average parents {} at {} windows", s.avg_parents, n + 1));
            }
            points.push(((n + 1) as f64, s.entries as f64, s.avg_parents));
        }
    }
    let report = net.validate();
    if report.count(|v| matches!(v, subseq::refnet::NetViolation::ParentCap { .. })) > 0 {
        return Err(format!("parent cap exceeded: {report}"));
    }
    let k = points.len() as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0, b + p.1));
    let (mx, my) = (sx / k, sy / k);
    let slope = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / points.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    let intercept = my - slope * mx;
    let worst = points
        .iter()
        .map(|p| {
            let fit = intercept + slope * p.0;
            (p.1 / fit).max(fit / p.1)
        })
        .fold(1.0, f64::max);
    let detail = points
        .iter()
        .map(|p| format!("n={} entries={} avg_parents={:.2}", p.0, p.1, p.2))
        .collect::<Vec<_>>()
        .join("; ");
    if worst > 1.15 {
        return Err(format!("entries deviate {worst:.3}x from the linear fit: {detail}"));
    }
    Ok(format!("worst deviation from linear fit {worst:.3}x; {detail}"))
}

fn pruning() -> Outcome {
    let mut r = rng(700);
    let ds = clustered_walks(&mut r, 100, 800, 1, 10, 0.3);
    let params = SegmentationParams::new(16, 0).unwrap();
    let d = DistanceSpec::new(DistanceKind::Erp, Alphabet::Vectors(1));
    let idx = build_index(ds, params, d, NetConfig::default()).unwrap();
    let objects = payloads(&idx);
    let observed_max = (0..2000)
        .map(|_| d.eval(objects.choose(&mut r).unwrap(), objects.choose(&mut r).unwrap()).unwrap())
        .fold(0.0, f64::max);
    let queries: Vec<Vec<Element>> = (0..100).map(|t| probe(&mut r, DistanceKind::Erp, &objects, t * 2 + 1)).collect();
    let radii: Vec<f64> = [0.01, 0.02, 0.05, 0.1].iter().map(|f| f * observed_max).collect();
    let k = space_matched_k(idx.net());
    let mv = MvIndex::build(&objects, k, 1000, 7, d).map_err(|e| e.to_string())?;
    let rows = compare_pruning(&objects, &queries, &radii, idx.net(), std::slice::from_ref(&mv)).map_err(|e| e.to_string())?;
    let n = objects.len() as f64;
    let mut detail = Vec::new();
    let mut failed = false;
    for &radius in &radii {
        let frac = |method: &str| {
            rows.iter().find(|row| row.radius == radius && row.method == method).map(|row| row.mean_computations / n).unwrap()
        };
        let (net, mvf) = (frac("refnet"), frac(&format!("mv-{k}")));
        failed |= !(net < 0.5 && net < mvf);
        detail.push(format!("r={:.1}% net={net:.3} mv-{k}={mvf:.3}", 100.0 * radius / observed_max));
    }
    let line = format!("{} windows, computed fraction per radius: {}", objects.len(), detail.join(", "));
    if failed {
        Err(line)
    } else {
        Ok(line)
    }
}

fn filter_completeness() -> Outcome {
    let kinds = [DistanceKind::Levenshtein, DistanceKind::Euclidean, DistanceKind::Erp, DistanceKind::Dfd];
    let lambda = 16;
    let mut r = rng(800);
    let mut misses = Vec::new();
    for instance in 0..200 {
        let kind = kinds[instance % kinds.len()];
        let lambda0 = instance / kinds.len() % 3;
        let (alphabet, noise) = if symbolic(kind) {
            (Alphabet::Symbols, Noise::Edits(1))
        } else {
            (Alphabet::Vectors(1), Noise::Additive(0.4))
        };
        let plant = plant_motif(&mut r, alphabet, 4, 4, 160, 48, lambda, noise);
        let d = spec(kind);
        let x = plant.dataset.sequences()[plant.seq as usize].elements();
        let actual = d.eval(&plant.query[plant.sq.range()], &x[plant.sx.range()]).map_err(|e| e.to_string())?;
        // noise <= eps / 2
        let eps = if symbolic(kind) { 2.0 } else { 2.0 * actual };
        let params = SegmentationParams::new(lambda, lambda0).unwrap();
        let idx = build_index(plant.dataset.clone(), params, d, NetConfig::default()).map_err(|e| e.to_string())?;
        let (hits, _) = candidate_pairs(&idx, &plant.query, lambda0, eps).map_err(|e| e.to_string())?;
        let covered = hits.iter().any(|m| {
            m.window.seq == plant.seq && plant.sx.contains(&m.window.span()) && plant.sq.contains(&m.segment)
        });
        if !covered {
            misses.push(format!("#{instance} {kind} lambda0={lambda0} d={actual:.3}"));
        }
    }
    if misses.is_empty() {
        Ok("200 planted motifs (levenshtein, euclidean, erp, dfd), every plant covered".into())
    } else {
        Err(format!("{} of 200 plants missed: {}", misses.len(), misses.join(", ")))
    }
}

fn same_pairs(got: &[SubsequencePair], want: &[SubsequencePair]) -> bool {
    got.len() == want.len()
        && got.iter().zip(want).all(|(a, b)| {
            (a.seq, a.sq, a.sx) == (b.seq, b.sq, b.sx) && (a.distance - b.distance).abs() <= TOLERANCE
        })
}

fn query_exactness() -> Outcome {
    let mut r = rng(900);
    let mut totals = BTreeMap::new();
    for kind in [DistanceKind::Levenshtein, DistanceKind::Hamming] {
        let d = spec(kind);
        for instance in 0..100 {
            let lambda0 = instance % 3;
            let seqs: Vec<Sequence> = (0..r.gen_range(1..=3))
                .map(|i| {
                    let len = r.gen_range(8..=40);
                    Sequence::new(format!("x{i}"), Alphabet::Symbols, random_text(&mut r, len, 3)).unwrap()
                })
                .collect();
            let ds = Dataset::new(Alphabet::Symbols, seqs).unwrap();
            let ql = r.gen_range(8..=40);
            let q = random_text(&mut r, ql, 3);
            let eps = f64::from(r.gen_range(0..=4));
            let params = SegmentationParams::new(8, lambda0).unwrap();
            let idx = build_index(ds.clone(), params, d, NetConfig::default()).unwrap();
            let fail = |what: &str| format!("{kind} instance {instance} (lambda0={lambda0}, eps={eps}): {what}");

            let OracleAnswer::All(every) =
                brute_force_oracle(&ds, &q, &d, 8, lambda0, OracleQuery::All { eps: f64::INFINITY }).unwrap()
            else {
                unreachable!()
            };
            let within: Vec<SubsequencePair> = every.iter().copied().filter(|p| p.distance <= eps).collect();

            let t1 = query_type1(&idx, &q, eps, lambda0).map_err(|e| fail(&e.to_string()))?.result;
            if !same_pairs(&t1, &within) {
                return Err(fail(&format!("type I returned {} pairs, oracle {}", t1.len(), within.len())));
            }
            let best_len = within.iter().map(|p| p.match_len()).max();
            let t2 = query_type2(&idx, &q, eps, lambda0).map_err(|e| fail(&e.to_string()))?.result;
            if t2.map(|p| p.match_len()) != best_len || t2.is_some_and(|p| p.distance > eps) {
                return Err(fail(&format!("type II {t2:?}, oracle length {best_len:?}")));
            }
            let min = every.iter().map(|p| p.distance).fold(f64::INFINITY, f64::min);
            let t3 = query_type3(&idx, &q, lambda0, Type3Options { seed: instance as u64, ..Default::default() })
                .map_err(|e| fail(&e.to_string()))?;
            if (t3.pair.distance - min).abs() > t3.increment + TOLERANCE {
                return Err(fail(&format!("type III distance {}, oracle {min}, tier {}", t3.pair.distance, t3.increment)));
            }
            *totals.entry(kind.name()).or_insert(0) += within.len();
        }
    }
    Ok(format!("100 instances per distance agree on all three types; type I pairs checked {totals:?}"))
}

fn boundary_fractions() -> Outcome {
    let mut notes = Vec::new();
    for kind in [DistanceKind::Levenshtein, DistanceKind::Erp] {
        let idx = window_index(kind, 600, 1000 + kind as u64);
        let mut r = rng(1050);
        let queries: Vec<Vec<Element>> = (0..3).map(|_| random_excerpt(idx.dataset(), 64, &mut r).unwrap()).collect();
        let max = max_segment_window_distance(&idx, &queries);
        let radii: Vec<f64> = (0..=10).map(|i| max * f64::from(i) / 10.0).collect();
        let rows = consecutive_stats(&idx, &queries, &radii).map_err(|e| e.to_string())?;
        if let Some(row) = rows.iter().find(|row| row.consecutive_fraction > row.unique_fraction) {
            return Err(format!("{kind}: consecutive {} > unique {} at {}", row.consecutive_fraction, row.unique_fraction, row.epsilon));
        }
        let last = rows.last().unwrap();
        if last.unique_fraction != 1.0 {
            return Err(format!("{kind}: unique fraction {} at the maximum distance {max}", last.unique_fraction));
        }
        notes.push(format!("{kind} max={max:.2}"));
    }
    Ok(format!("unique fraction 1.0 at the maximum, consecutive <= unique throughout [{}]", notes.join(", ")))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let data = dir.path().join("walks.csv");
    let ds = clustered_walks(&mut rng(1100), 20, 200, 1, 4, 0.3);
    fs::write(&data, subseq::sequence::serialize_dataset(&ds)).map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for run in 0..2 {
        let out_dir = dir.path().join(format!("run{run}"));
        let args = [
            "subseq", "bench", "--dataset", data.to_str().unwrap(), "--format", "series", "--distance", "erp",
            "--lambda", "16", "--seed", "3", "--queries", "20", "--samples", "300", "--out-dir", out_dir.to_str().unwrap(),
        ];
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = subseq::cli::run(args, &mut out, &mut err);
        if code != 0 {
            return Err(format!("bench exited {code}: {}", String::from_utf8_lossy(&err)));
        }
        let files: Vec<Vec<u8>> = ["pruning.csv", "histogram.csv", "consecutive.csv"]
            .iter()
            .map(|f| fs::read(out_dir.join(f)).unwrap())
            .collect();
        outputs.push(files);
    }
    if outputs[0] != outputs[1] {
        return Err("bench CSVs differ between identical runs".into());
    }
    if !outputs[0].iter().all(|f| f.starts_with(b"# config_hash=")) {
        return Err("CSV without a config hash header".into());
    }
    let bytes: usize = outputs[0].iter().map(Vec::len).sum();
    Ok(format!("two runs, 3 CSVs, {bytes} bytes identical"))
}

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--list") {
        return;
    }
    let filters: Vec<&String> = args.iter().filter(|a| !a.starts_with('-')).collect();
    let criteria: [(u8, &str, fn() -> Outcome); 11] = [
        (1, "consistency", consistency),
        (2, "metric-axioms", metric_axioms),
        (3, "dp-vs-oracle", dp_vs_oracle),
        (4, "dtw-anecdote", dtw_anecdote),
        (5, "net-exactness", net_exactness),
        (6, "space-linearity", space_linearity),
        (7, "pruning", pruning),
        (8, "filter-completeness", filter_completeness),
        (9, "query-exactness", query_exactness),
        (10, "boundary-fractions", boundary_fractions),
        (11, "determinism", determinism),
    ];
    let selected = |name: &str| filters.is_empty() || filters.iter().any(|f| name.contains(f.as_str()) || "acceptance".contains(f.as_str()));
    let mut failed = 0;
    for (n, name, check) in criteria {
        if !selected(name) {
            continue;
        }
        let started = Instant::now();
        let outcome = check();
        let secs = started.elapsed().as_secs_f64();
        let (status, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        failed += usize::from(outcome.is_err());
        println!("criterion {n:>2} {status} {name}: {detail} ({secs:.1}s)");
    }
    if failed > 0 {
        println!("acceptance: {failed} criterion(s) failed");
        std::process::exit(1);
    }
}
