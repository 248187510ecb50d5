//! Subsequence matching over a windowed reference net.
//!
//! The database is cut into fixed windows of length `l = lambda / 2`, which are indexed in a
//! [`ReferenceNet`]. A query is cut into every segment of length `l - lambda0 ..= l + lambda0`,
//! and each segment is range-queried against the net. The windows that were hit are grouped
//! into runs of adjacent windows. Each run induces a region of candidate span pairs, and the
//! regions are verified exactly with prefix tables.
//!
//! For Levenshtein, Hamming and Euclidean distance this is exact: when `(SQ, SX)` is within
//! `eps`, every window inside `SX` matches some segment inside `SQ` within `eps`. So the windows
//! of `SX` form one run and its region contains the pair.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::io;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::distance::{DistanceError, DistanceSpec};
use crate::refnet::{NetConfig, NetError, ObjectId, ReferenceNet};
use crate::segment::{
    extract_query_segments, partition_windows, QuerySegment, SegmentationError, SegmentationParams, WindowRef,
};
use crate::sequence::{Dataset, Element, Span};

/// Work limit for [`brute_force_oracle`], in dynamic-programming cells.
pub const ORACLE_BUDGET: u64 = 2_000_000_000;

#[derive(Debug, Error)]
pub enum MatchError {
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Segmentation(#[from] SegmentationError),
    #[error(transparent)]
    Distance(#[from] DistanceError),
    #[error("the index holds no windows")]
    NoWindows,
    #[error("query of length {len} is shorter than the minimum match length {lambda}")]
    QueryTooShort { len: usize, lambda: usize },
    #[error("no pair of subsequences satisfies the length constraints")]
    NoPair,
    #[error("invalid {what}: {value}")]
    InvalidParameter { what: &'static str, value: f64 },
    #[error("brute force would need about {estimated} cell evaluations (limit {limit})")]
    Budget { estimated: u64, limit: u64 },
    #[error("index does not match its dataset: {0}")]
    Inconsistent(String),
}

/// A query segment together with a database window it matched.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SegmentMatch {
    pub segment: Span,
    pub window: WindowRef,
    /// `None` when the window was accepted through a covering bound without evaluation.
    pub distance: Option<f64>,
}

/// `sq` on the query, `sx` on database sequence `seq` (its position in the dataset).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SubsequencePair {
    pub seq: u32,
    pub sq: Span,
    pub sx: Span,
    pub distance: f64,
}

impl SubsequencePair {
    fn key(&self) -> (u32, Span, Span) {
        (self.seq, self.sq, self.sx)
    }

    /// Shorter of the two lengths, which is what Type II maximizes.
    pub fn match_len(&self) -> usize {
        self.sq.len().min(self.sx.len())
    }

    /// Ordering for Type II: longer `match_len`, then longer overall, then closer, then
    /// canonical span order. `Less` means `self` is preferred.
    pub fn cmp_longest(&self, other: &Self) -> Ordering {
        other
            .match_len()
            .cmp(&self.match_len())
            .then(other.sq.len().max(other.sx.len()).cmp(&self.sq.len().max(self.sx.len())))
            .then(self.distance.total_cmp(&other.distance))
            .then(self.key().cmp(&other.key()))
    }

    /// Ordering for Type III: smaller distance, then canonical span order.
    pub fn cmp_closest(&self, other: &Self) -> Ordering {
        self.distance.total_cmp(&other.distance).then(self.key().cmp(&other.key()))
    }
}

/// Counters for one query.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct QueryStats {
    pub segments: usize,
    /// Distance evaluations spent in the net during filtering.
    pub filter_computations: u64,
    pub matches: usize,
    pub regions: usize,
    pub tables: u64,
    pub verified_pairs: u64,
}

impl QueryStats {
    fn absorb(&mut self, other: &QueryStats) {
        self.segments += other.segments;
        self.filter_computations += other.filter_computations;
        self.matches += other.matches;
        self.regions += other.regions;
        self.tables += other.tables;
        self.verified_pairs += other.verified_pairs;
    }
}

/// Windows of a dataset indexed in a reference net. Net object ids index `windows`.
#[derive(Clone, Debug)]
pub struct SubseqIndex {
    dataset: Dataset,
    params: SegmentationParams,
    net: ReferenceNet,
    windows: Vec<WindowRef>,
}

pub fn build_index(
    dataset: Dataset,
    params: SegmentationParams,
    distance: DistanceSpec,
    config: NetConfig,
) -> Result<SubseqIndex, MatchError> {
    let mut net = ReferenceNet::new(distance, config)?;
    let windows = dataset_windows(&dataset, &params);
    for (id, w) in windows.iter().enumerate() {
        let seq = &dataset.sequences()[w.seq as usize];
        net.insert(id as ObjectId, seq.slice(w.span()).to_vec())?;
    }
    Ok(SubseqIndex { dataset, params, net, windows })
}

/// Every window of every sequence, in sequence then offset order.
pub fn dataset_windows(dataset: &Dataset, params: &SegmentationParams) -> Vec<WindowRef> {
    dataset
        .sequences()
        .iter()
        .enumerate()
        .flat_map(|(i, s)| partition_windows(i as u32, s.len(), params))
        .collect()
}

impl SubseqIndex {
    /// Reassembles an index from a stored net. The net must hold exactly one object per window,
    /// with matching payloads.
    pub fn from_parts(dataset: Dataset, params: SegmentationParams, net: ReferenceNet) -> Result<Self, MatchError> {
        let windows = dataset_windows(&dataset, &params);
        if net.len() != windows.len() {
            return Err(MatchError::Inconsistent(format!(
                "net holds {} objects, dataset has {} windows",
                net.len(),
                windows.len()
            )));
        }
        for (id, w) in windows.iter().enumerate() {
            let expected = dataset.sequences()[w.seq as usize].slice(w.span());
            if net.payload(id as ObjectId) != Some(expected) {
                return Err(MatchError::Inconsistent(format!("object {id} does not hold window {w:?}")));
            }
        }
        Ok(SubseqIndex { dataset, params, net, windows })
    }

    pub fn dataset(&self) -> &Dataset {
        &self.dataset
    }

    pub fn params(&self) -> &SegmentationParams {
        &self.params
    }

    pub fn net(&self) -> &ReferenceNet {
        &self.net
    }

    pub fn windows(&self) -> &[WindowRef] {
        &self.windows
    }

    pub fn distance(&self) -> &DistanceSpec {
        self.net.distance()
    }

    pub fn build_computations(&self) -> u64 {
        self.net.build_computations()
    }

    /// Segmentation for a query with shift budget `lambda0`. Equal-length distances only use
    /// segments of exactly the window length.
    fn query_params(&self, lambda0: usize) -> Result<SegmentationParams, MatchError> {
        let lambda0 = if self.distance().kind().requires_equal_length() { 0 } else { lambda0 };
        Ok(self.params.with_lambda0(lambda0)?)
    }

    fn check_query(&self, q: &[Element], eps: f64) -> Result<(), MatchError> {
        if eps.is_nan() || eps < 0.0 {
            return Err(MatchError::InvalidParameter { what: "radius", value: eps });
        }
        self.distance().check(q, q)?;
        Ok(())
    }
}

/// Range-queries every query segment against the net with radius `eps`.
pub fn candidate_pairs(
    idx: &SubseqIndex,
    q: &[Element],
    lambda0: usize,
    eps: f64,
) -> Result<(Vec<SegmentMatch>, QueryStats), MatchError> {
    idx.check_query(q, eps)?;
    let params = idx.query_params(lambda0)?;
    let segments = extract_query_segments(q.len(), &params);
    Ok(filter(idx, q, &segments, eps))
}

fn filter(idx: &SubseqIndex, q: &[Element], segments: &[QuerySegment], eps: f64) -> (Vec<SegmentMatch>, QueryStats) {
    let per_segment: Vec<(Vec<SegmentMatch>, u64)> = segments
        .par_iter()
        .map(|seg| {
            let r = idx.net.range_query(&q[seg.span.range()], eps);
            let matches = r
                .hits
                .iter()
                .map(|h| SegmentMatch { segment: seg.span, window: idx.windows[h.id as usize], distance: h.distance })
                .collect();
            (matches, r.computations)
        })
        .collect();
    let mut stats = QueryStats { segments: segments.len(), ..QueryStats::default() };
    let mut out = Vec::new();
    for (m, c) in per_segment {
        stats.filter_computations += c;
        out.extend(m);
    }
    stats.matches = out.len();
    (out, stats)
}

/// Inclusive position ranges around one segment match, clamped to `1..=len` of each side.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CandidateRanges {
    pub sq_start: (usize, usize),
    pub sq_end: (usize, usize),
    pub sx_start: (usize, usize),
    pub sx_end: (usize, usize),
}

/// Local span ranges around a single match: query spans extend the segment by up to
/// `l + lambda0` on each side, database spans cover the window plus up to `l` before it and
/// end within `lambda` of its start.
pub fn expand_candidate(
    m: &SegmentMatch,
    params: &SegmentationParams,
    query_len: usize,
    seq_len: usize,
) -> CandidateRanges {
    let l = params.window();
    let reach = l + params.lambda0();
    let (a, b, c) = (m.segment.start, m.segment.end, m.window.start as usize);
    let clamp = |lo: usize, hi: usize, len: usize| (lo.clamp(1, len), hi.clamp(1, len));
    CandidateRanges {
        sq_start: clamp(a.saturating_sub(reach), a, query_len),
        sq_end: clamp(b, b + reach, query_len),
        sx_start: clamp(c.saturating_sub(l), c, seq_len),
        sx_end: clamp(c + l, c + params.lambda(), seq_len),
    }
}

/// Candidate span pairs induced by a run of adjacent hit windows in one sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Region {
    seq: u32,
    sx_start: (usize, usize),
    sx_end: (usize, usize),
    sq_start: (usize, usize),
    sq_end: (usize, usize),
}

impl Region {
    /// Upper bound on the length of any database span in the region.
    fn max_sx_len(&self) -> usize {
        self.sx_end.1 + 1 - self.sx_start.0
    }
}

fn regions(idx: &SubseqIndex, q_len: usize, lambda0: usize, matches: &[SegmentMatch]) -> Vec<Region> {
    let l = idx.params.window();
    // (seq, window index) -> (smallest segment end, largest segment start)
    let mut hit: BTreeMap<(u32, usize), (usize, usize)> = BTreeMap::new();
    for m in matches {
        let k = (m.window.start as usize - 1) / l;
        let e = hit.entry((m.window.seq, k)).or_insert((usize::MAX, 0));
        e.0 = e.0.min(m.segment.end);
        e.1 = e.1.max(m.segment.start);
    }
    let mut out = Vec::new();
    let mut iter = hit.into_iter().peekable();
    while let Some(((seq, first), (mut min_b, mut max_a))) = iter.next() {
        let mut last = first;
        while let Some(&((s, k), (b, a))) = iter.peek() {
            if s != seq || k != last + 1 {
                break;
            }
            min_b = min_b.min(b);
            max_a = max_a.max(a);
            last = k;
            iter.next();
        }
        let seq_len = idx.dataset.sequences()[seq as usize].len();
        let (c_first, c_last) = (first * l + 1, last * l + 1);
        let sx_start = ((c_first + 1).saturating_sub(l).max(1), c_last);
        let sx_end = (c_first + l - 1, (c_last + 2 * l - 2).min(seq_len));
        let max_sq = sx_end.1 + 1 - sx_start.0 + lambda0;
        let sq_start = ((min_b + 1).saturating_sub(max_sq).max(1), max_a);
        let sq_end = (min_b, (max_a + max_sq - 1).min(q_len));
        out.push(Region { seq, sx_start, sx_end, sq_start, sq_end });
    }
    out
}

/// Visits every pair of the region that meets the length constraints and lies within `eps`.
fn scan_region(
    idx: &SubseqIndex,
    q: &[Element],
    region: &Region,
    lambda0: usize,
    eps: f64,
    stats: &mut QueryStats,
    mut visit: impl FnMut(SubsequencePair),
) {
    let d = idx.distance();
    let equal = d.kind().requires_equal_length();
    let lambda = idx.params.lambda();
    let x = idx.dataset.sequences()[region.seq as usize].elements();
    for sq_start in region.sq_start.0..=region.sq_start.1 {
        for sx_start in region.sx_start.0..=region.sx_start.1 {
            let sx_hi = region.sx_end.1;
            let sq_hi = region.sq_end.1.min(sx_hi + 1 - sx_start + lambda0 + sq_start - 1);
            if sx_hi + 1 < sx_start + lambda || sq_hi + 1 < sq_start + lambda {
                continue;
            }
            let qs = &q[sq_start - 1..sq_hi];
            let xs = &x[sx_start - 1..sx_hi];
            let table = d.prefix_table(qs, xs).expect("inputs checked on entry");
            stats.tables += 1;
            let sq_end_lo = region.sq_end.0.max(sq_start + lambda - 1);
            let sx_end_lo = region.sx_end.0.max(sx_start + lambda - 1);
            for sq_end in sq_end_lo..=sq_hi {
                let lq = sq_end + 1 - sq_start;
                let (lx_lo, lx_hi) = if equal { (lq, lq) } else { (lq.saturating_sub(lambda0), lq + lambda0) };
                let lo = sx_end_lo.max(sx_start + lx_lo - 1);
                let hi = sx_hi.min(sx_start + lx_hi - 1);
                for sx_end in lo..=hi {
                    let lx = sx_end + 1 - sx_start;
                    stats.verified_pairs += 1;
                    let Some(dist) = table.get(lq, lx) else { continue };
                    if dist <= eps {
                        visit(SubsequencePair {
                            seq: region.seq,
                            sq: Span::new(sq_start, sq_end),
                            sx: Span::new(sx_start, sx_end),
                            distance: dist,
                        });
                    }
                }
            }
        }
    }
}

struct Filtered {
    regions: Vec<Region>,
    stats: QueryStats,
}

fn filter_regions(idx: &SubseqIndex, q: &[Element], lambda0: usize, eps: f64) -> Result<Filtered, MatchError> {
    idx.check_query(q, eps)?;
    let params = idx.query_params(lambda0)?;
    let segments = extract_query_segments(q.len(), &params);
    let (matches, mut stats) = filter(idx, q, &segments, eps);
    let found = regions(idx, q.len(), effective_lambda0(idx, lambda0), &matches);
    stats.regions = found.len();
    Ok(Filtered { regions: found, stats })
}

/// Result of a Type I or Type II query.
#[derive(Clone, Debug, Default)]
pub struct QueryOutcome<T> {
    pub result: T,
    pub stats: QueryStats,
}

/// Type I: all pairs with `|SQ|, |SX| >= lambda`, `||SQ| - |SX|| <= lambda0` and distance at
/// most `eps`, in canonical order.
pub fn query_type1(
    idx: &SubseqIndex,
    q: &[Element],
    eps: f64,
    lambda0: usize,
) -> Result<QueryOutcome<Vec<SubsequencePair>>, MatchError> {
    let f = filter_regions(idx, q, lambda0, eps)?;
    let lambda0 = effective_lambda0(idx, lambda0);
    let per_region: Vec<(Vec<SubsequencePair>, QueryStats)> = f
        .regions
        .par_iter()
        .map(|r| {
            let mut stats = QueryStats::default();
            let mut pairs = Vec::new();
            scan_region(idx, q, r, lambda0, eps, &mut stats, |p| pairs.push(p));
            (pairs, stats)
        })
        .collect();
    let mut stats = f.stats;
    let mut found: BTreeMap<(u32, Span, Span), f64> = BTreeMap::new();
    for (pairs, s) in per_region {
        stats.absorb(&s);
        for p in pairs {
            found.insert(p.key(), p.distance);
        }
    }
    let result = found.into_iter().map(|((seq, sq, sx), distance)| SubsequencePair { seq, sq, sx, distance }).collect();
    Ok(QueryOutcome { result, stats })
}

fn effective_lambda0(idx: &SubseqIndex, lambda0: usize) -> usize {
    if idx.distance().kind().requires_equal_length() {
        0
    } else {
        lambda0
    }
}

/// Type II: the longest pair within `eps` (see [`SubsequencePair::cmp_longest`]).
///
/// Regions are verified in decreasing order of their length bound, stopping once the best
/// pair found is longer than any remaining region allows.
pub fn query_type2(
    idx: &SubseqIndex,
    q: &[Element],
    eps: f64,
    lambda0: usize,
) -> Result<QueryOutcome<Option<SubsequencePair>>, MatchError> {
    let f = filter_regions(idx, q, lambda0, eps)?;
    let lambda0 = effective_lambda0(idx, lambda0);
    let mut order = f.regions;
    order.sort_by(|a, b| b.max_sx_len().cmp(&a.max_sx_len()).then(a.cmp(b)));
    let mut stats = f.stats;
    let mut best: Option<SubsequencePair> = None;
    for r in &order {
        if best.is_some_and(|b| b.match_len() > r.max_sx_len()) {
            break;
        }
        scan_region(idx, q, r, lambda0, eps, &mut stats, |p| {
            if best.map_or(true, |b| p.cmp_longest(&b) == Ordering::Less) {
                best = Some(p);
            }
        });
    }
    Ok(QueryOutcome { result: best, stats })
}

/// Sampled scale of window-to-window distances, used for Type III defaults.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DistanceScale {
    pub min_nonzero: Option<f64>,
    pub max: f64,
    pub samples: usize,
}

impl DistanceScale {
    /// Step between verification tiers: a twentieth of the smallest nonzero sampled distance.
    pub fn default_increment(&self) -> f64 {
        self.min_nonzero.map_or(1.0, |m| m * 0.05)
    }
}

/// Distances between `samples` random pairs of distinct windows.
pub fn sample_distance_scale(idx: &SubseqIndex, samples: usize, seed: u64) -> DistanceScale {
    let n = idx.windows.len();
    let mut scale = DistanceScale { min_nonzero: None, max: 0.0, samples: 0 };
    if n < 2 {
        return scale;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = idx.distance();
    for _ in 0..samples {
        let pick = sample(&mut rng, n, 2);
        let a = idx.net.payload(pick.index(0) as ObjectId).expect("window payload");
        let b = idx.net.payload(pick.index(1) as ObjectId).expect("window payload");
        let v = d.eval_unchecked(a, b);
        scale.samples += 1;
        scale.max = scale.max.max(v);
        if v > 0.0 {
            scale.min_nonzero = Some(scale.min_nonzero.map_or(v, |m: f64| m.min(v)));
        }
    }
    scale
}

/// Tiering controls for Type III. `None` picks a default from a 1,000-pair sample.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Type3Options {
    pub increment: Option<f64>,
    pub hint: Option<f64>,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Type3Outcome {
    pub pair: SubsequencePair,
    /// Smallest radius at which some segment matched, to within one increment.
    pub first_hit: f64,
    /// Radius of the tier at which the pair was verified.
    pub tier: f64,
    pub tiers: usize,
    pub increment: f64,
    pub stats: QueryStats,
}

/// Type III: the closest pair meeting the length constraints.
///
/// A binary search finds the smallest radius at which any segment matches; the radius then
/// grows in steps of the increment until a pair verifies. Every pair within the tier radius is
/// enumerated, so the pair returned is the global minimum whenever filtering is complete.
pub fn query_type3(
    idx: &SubseqIndex,
    q: &[Element],
    lambda0: usize,
    options: Type3Options,
) -> Result<Type3Outcome, MatchError> {
    if idx.windows.is_empty() {
        return Err(MatchError::NoWindows);
    }
    let lambda = idx.params.lambda();
    if q.len() < lambda {
        return Err(MatchError::QueryTooShort { len: q.len(), lambda });
    }
    idx.check_query(q, 0.0)?;
    let params = idx.query_params(lambda0)?;
    let lambda0 = effective_lambda0(idx, lambda0);
    let segments = extract_query_segments(q.len(), &params);
    let total_combos = segments.len() * idx.windows.len();

    let needs_sample = options.increment.is_none() || options.hint.is_none();
    let scale = needs_sample.then(|| sample_distance_scale(idx, 1000, options.seed));
    let increment = match options.increment {
        Some(v) => v,
        None => scale.expect("sampled").default_increment(),
    };
    if !(increment.is_finite() && increment > 0.0) {
        return Err(MatchError::InvalidParameter { what: "increment", value: increment });
    }

    let mut stats = QueryStats::default();
    let probe = |eps: f64, stats: &mut QueryStats| -> Vec<SegmentMatch> {
        let (m, s) = filter(idx, q, &segments, eps);
        stats.absorb(&s);
        m
    };

    let mut hi = options.hint.unwrap_or_else(|| scale.expect("sampled").max).max(increment);
    while probe(hi, &mut stats).is_empty() {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    if !probe(0.0, &mut stats).is_empty() {
        hi = 0.0;
    }
    while hi - lo > increment {
        let mid = lo + (hi - lo) / 2.0;
        if probe(mid, &mut stats).is_empty() {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    let first_hit = hi;
    let mut tier = hi;
    let mut tiers = 0;
    loop {
        tiers += 1;
        let matches = probe(tier, &mut stats);
        let saturated = matches.len() == total_combos;
        let found = regions(idx, q.len(), lambda0, &matches);
        stats.regions += found.len();
        let radius = if saturated { f64::INFINITY } else { tier };
        let per_region: Vec<(Option<SubsequencePair>, QueryStats)> = found
            .par_iter()
            .map(|r| {
                let mut s = QueryStats::default();
                let mut best: Option<SubsequencePair> = None;
                scan_region(idx, q, r, lambda0, radius, &mut s, |p| {
                    if best.map_or(true, |b| p.cmp_closest(&b) == Ordering::Less) {
                        best = Some(p);
                    }
                });
                (best, s)
            })
            .collect();
        let mut best: Option<SubsequencePair> = None;
        for (p, s) in per_region {
            stats.absorb(&s);
            if let Some(p) = p {
                if best.map_or(true, |b| p.cmp_closest(&b) == Ordering::Less) {
                    best = Some(p);
                }
            }
        }
        if let Some(pair) = best {
            return Ok(Type3Outcome { pair, first_hit, tier, tiers, increment, stats });
        }
        if saturated {
            return Err(MatchError::NoPair);
        }
        tier += increment;
    }
}

/// Which answer [`brute_force_oracle`] should produce.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OracleQuery {
    All { eps: f64 },
    Longest { eps: f64 },
    Closest,
}

#[derive(Clone, Debug, PartialEq)]
pub enum OracleAnswer {
    All(Vec<SubsequencePair>),
    Longest(Option<SubsequencePair>),
    Closest(Option<SubsequencePair>),
}

/// Evaluates every admissible `(SQ, SX)` pair directly. Refuses instances whose estimated
/// cost exceeds [`ORACLE_BUDGET`] cells.
pub fn brute_force_oracle(
    dataset: &Dataset,
    q: &[Element],
    distance: &DistanceSpec,
    lambda: usize,
    lambda0: usize,
    query: OracleQuery,
) -> Result<OracleAnswer, MatchError> {
    let equal = distance.kind().requires_equal_length();
    let lambda0 = if equal { 0 } else { lambda0 };
    let n = q.len();
    let mut estimated: u64 = 0;
    for x in dataset.sequences() {
        let m = x.len();
        for lq in lambda..=n {
            for lx in lq.saturating_sub(lambda0).max(lambda)..=(lq + lambda0).min(m) {
                estimated += ((n - lq + 1) * (m - lx + 1) * lq * lx) as u64;
            }
        }
    }
    if estimated > ORACLE_BUDGET {
        return Err(MatchError::Budget { estimated, limit: ORACLE_BUDGET });
    }
    distance.check(q, q)?;

    let mut all = Vec::new();
    let mut longest: Option<SubsequencePair> = None;
    let mut closest: Option<SubsequencePair> = None;
    for (si, x) in dataset.sequences().iter().enumerate() {
        let x = x.elements();
        for sq_start in 1..=n {
            for sq_end in (sq_start + lambda - 1)..=n {
                let lq = sq_end + 1 - sq_start;
                for sx_start in 1..=x.len() {
                    for lx in lq.saturating_sub(lambda0).max(lambda)..=lq + lambda0 {
                        let sx_end = sx_start + lx - 1;
                        if sx_end > x.len() {
                            break;
                        }
                        let sq = Span::new(sq_start, sq_end);
                        let sx = Span::new(sx_start, sx_end);
                        let dist = distance.eval(&q[sq.range()], &x[sx.range()])?;
                        let p = SubsequencePair { seq: si as u32, sq, sx, distance: dist };
                        match query {
                            OracleQuery::All { eps } if dist <= eps => all.push(p),
                            OracleQuery::Longest { eps } if dist <= eps => {
                                if longest.map_or(true, |b| p.cmp_longest(&b) == Ordering::Less) {
                                    longest = Some(p);
                                }
                            }
                            OracleQuery::Closest => {
                                if closest.map_or(true, |b| p.cmp_closest(&b) == Ordering::Less) {
                                    closest = Some(p);
                                }
                            }
                            _ => {}
                        }
                    }
                }
            }
        }
    }
    Ok(match query {
        OracleQuery::All { .. } => {
            all.sort_by(|a, b| a.key().cmp(&b.key()));
            OracleAnswer::All(all)
        }
        OracleQuery::Longest { .. } => OracleAnswer::Longest(longest),
        OracleQuery::Closest => OracleAnswer::Closest(closest),
    })
}

/// Writes result rows `query_id,db_seq_id,sq_start,sq_end,sx_start,sx_end,distance`, using
/// the sequence ids of `dataset`.
pub fn write_pairs_csv<W: io::Write>(
    out: &mut csv::Writer<W>,
    query_id: &str,
    dataset: &Dataset,
    pairs: &[SubsequencePair],
) -> csv::Result<()> {
    for p in pairs {
        let seq_id = dataset.sequences()[p.seq as usize].id();
        out.write_record([
            query_id,
            seq_id,
            &p.sq.start.to_string(),
            &p.sq.end.to_string(),
            &p.sx.start.to_string(),
            &p.sx.end.to_string(),
            &p.distance.to_string(),
        ])?;
    }
    Ok(())
}

pub const PAIRS_CSV_HEADER: [&str; 7] = ["query_id", "db_seq_id", "sq_start", "sq_end", "sx_start", "sx_end", "distance"];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distance::DistanceKind;
    use crate::sequence::{Alphabet, Sequence};

    fn lev() -> DistanceSpec {
        DistanceSpec::new(DistanceKind::Levenshtein, Alphabet::Symbols)
    }

    fn strings(xs: &[&str]) -> Dataset {
        Dataset::new(Alphabet::Symbols, xs.iter().enumerate().map(|(i, s)| Sequence::symbols(i.to_string(), s)).collect())
            .unwrap()
    }

    fn elems(s: &str) -> Vec<Element> {
        Sequence::symbols("q", s).elements().to_vec()
    }

    #[test]
    fn window_count_and_empty_dataset() {
        let p = SegmentationParams::new(20, 0).unwrap();
        let x: String = (0..100).map(|i| (b'a' + (i * 7 % 26) as u8) as char).collect();
        let idx = build_index(strings(&[&x]), p, lev(), NetConfig::default()).unwrap();
        assert_eq!(idx.windows().len(), 10);
        assert_eq!(idx.net().len(), 10);
        assert!(idx.net().validate().is_clean());

        let empty = build_index(Dataset::empty(Alphabet::Symbols), p, lev(), NetConfig::default()).unwrap();
        assert!(empty.net().is_empty());
        let q = elems("abcdefghijklmnopqrstuvwxyz");
        assert!(matches!(query_type3(&empty, &q, 0, Type3Options::default()), Err(MatchError::NoWindows)));
    }

    #[test]
    fn expand_candidate_arithmetic() {
        let p = SegmentationParams::new(20, 0).unwrap();
        let m = SegmentMatch {
            segment: Span::new(11, 20),
            window: WindowRef { seq: 0, start: 21, len: 10 },
            distance: Some(0.0),
        };
        let r = expand_candidate(&m, &p, 100, 100);
        assert_eq!(r.sq_start, (1, 11));
        assert_eq!(r.sq_end, (20, 30));
        assert_eq!(r.sx_start, (11, 21));
        assert_eq!(r.sx_end, (31, 41));

        let p2 = SegmentationParams::new(20, 2).unwrap();
        let r2 = expand_candidate(&m, &p2, 100, 100);
        assert_eq!(r2.sq_start, (1, 11));
        assert_eq!(r2.sq_end, (20, 32));
        let m2 = SegmentMatch { segment: Span::new(15, 24), ..m };
        assert_eq!(expand_candidate(&m2, &p2, 100, 100).sq_start, (3, 15));

        let edge = SegmentMatch {
            segment: Span::new(1, 10),
            window: WindowRef { seq: 0, start: 1, len: 10 },
            distance: Some(0.0),
        };
        let r = expand_candidate(&edge, &p, 25, 25);
        assert_eq!(r.sq_start, (1, 1));
        assert_eq!(r.sx_start, (1, 1));
        assert_eq!(r.sx_end, (11, 21));
    }

    #[test]
    fn exact_copy_queries() {
        let x = "thequickbrownfoxjumpsoverthelazydog";
        let p = SegmentationParams::new(8, 0).unwrap();
        let idx = build_index(strings(&[x, "zzzzzzzzzzzzzzzzzzzz"]), p, lev(), NetConfig::default()).unwrap();
        let q = elems(x);

        let (matches, _) = candidate_pairs(&idx, &q, 0, 0.0).unwrap();
        for w in idx.windows().iter().filter(|w| w.seq == 0) {
            assert!(matches.iter().any(|m| m.window == *w && m.segment == w.span()), "{w:?}");
        }

        let t1 = query_type1(&idx, &q, 0.0, 0).unwrap().result;
        let full = Span::new(1, x.len());
        assert!(t1.iter().any(|p| p.seq == 0 && p.sq == full && p.sx == full));
        let aligned = t1.iter().filter(|p| p.sq == p.sx).count();
        let n = x.len();
        assert_eq!(aligned, (8..=n).map(|len| n - len + 1).sum::<usize>());

        let t2 = query_type2(&idx, &q, 0.0, 0).unwrap().result.unwrap();
        assert_eq!((t2.seq, t2.sq, t2.sx), (0, full, full));

        let t3 = query_type3(&idx, &q, 0, Type3Options::default()).unwrap();
        assert_eq!(t3.pair.distance, 0.0);
        assert_eq!(t3.pair.seq, 0);
    }

    #[test]
    fn radius_below_minimum_gives_nothing() {
        let p = SegmentationParams::new(8, 1).unwrap();
        let idx = build_index(strings(&["aaaaaaaaaaaaaaaaaaaa"]), p, lev(), NetConfig::default()).unwrap();
        let q = elems("bbbbbbbbbbbb");
        assert!(candidate_pairs(&idx, &q, 1, 2.0).unwrap().0.is_empty());
        assert!(query_type1(&idx, &q, 2.0, 1).unwrap().result.is_empty());
        assert!(query_type2(&idx, &q, 2.0, 1).unwrap().result.is_none());
    }

    #[test]
    fn closest_sequence_wins() {
        let p = SegmentationParams::new(8, 1).unwrap();
        let idx =
            build_index(strings(&["qwertyuiopasdfgh", "xxxxmotifmotifxxxx"]), p, lev(), NetConfig::default()).unwrap();
        let q = elems("motifmotif");
        let t3 = query_type3(&idx, &q, 1, Type3Options::default()).unwrap();
        assert_eq!(t3.pair.seq, 1);
        assert_eq!(t3.pair.distance, 0.0);
        assert!(Span::new(5, 14).contains(&t3.pair.sx));
    }

    #[test]
    fn oracle_enumeration_count() {
        let ds = strings(&["abcdefghij"]);
        let q = elems("abcdefghij");
        let OracleAnswer::All(all) =
            brute_force_oracle(&ds, &q, &lev(), 4, 0, OracleQuery::All { eps: f64::INFINITY }).unwrap()
        else {
            unreachable!()
        };
        assert_eq!(all.len(), (4..=10).map(|len| (11 - len) * (11 - len)).sum::<usize>());
        let OracleAnswer::Closest(c) = brute_force_oracle(&ds, &q, &lev(), 4, 0, OracleQuery::Closest).unwrap() else {
            unreachable!()
        };
        assert_eq!(c.unwrap().distance, 0.0);
    }

    #[test]
    fn oracle_budget() {
        let long: String = "ab".repeat(400);
        let ds = strings(&[&long]);
        let q = elems(&long);
        assert!(matches!(
            brute_force_oracle(&ds, &q, &lev(), 4, 2, OracleQuery::Closest),
            Err(MatchError::Budget { .. })
        ));
    }
}
