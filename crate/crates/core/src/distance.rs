//! Sequence distances and empirical checks of their metric and consistency properties.
//!
//! Every dynamic program keeps two rolling rows. [`DistanceSpec::prefix_table`] materializes the
//! full matrix instead, whose cell `(i, j)` is the distance between the length-`i` prefix of the
//! first argument and the length-`j` prefix of the second.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use thiserror::Error;

use crate::sequence::{ground, Alphabet, Element, Point, SequenceError};

/// Absolute tolerance for real-valued comparisons.
pub const TOLERANCE: f64 = 1e-9;

/// Largest sequence length accepted by [`check_consistency`].
pub const CONSISTENCY_BUDGET: usize = 14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DistanceError {
    #[error("{kind} needs equal lengths, got {left} and {right}")]
    LengthMismatch { kind: DistanceKind, left: usize, right: usize },
    #[error("{0} is undefined for empty sequences")]
    Empty(DistanceKind),
    #[error(transparent)]
    Kind(#[from] SequenceError),
    #[error("consistency check limited to length {CONSISTENCY_BUDGET}, got {0}")]
    BudgetExceeded(usize),
    #[error("unknown distance {0:?}")]
    UnknownKind(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DistanceKind {
    Euclidean,
    Hamming,
    Levenshtein,
    Erp,
    Dfd,
    Dtw,
}

impl DistanceKind {
    pub const ALL: [DistanceKind; 6] = [
        DistanceKind::Euclidean,
        DistanceKind::Hamming,
        DistanceKind::Levenshtein,
        DistanceKind::Erp,
        DistanceKind::Dfd,
        DistanceKind::Dtw,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DistanceKind::Euclidean => "euclidean",
            DistanceKind::Hamming => "hamming",
            DistanceKind::Levenshtein => "levenshtein",
            DistanceKind::Erp => "erp",
            DistanceKind::Dfd => "dfd",
            DistanceKind::Dtw => "dtw",
        }
    }

    /// Whether the distance obeys the triangle inequality. DTW does not.
    pub fn is_metric(self) -> bool {
        self != DistanceKind::Dtw
    }

    pub fn is_consistent(self) -> bool {
        true
    }

    /// Euclidean and Hamming compare aligned positions only.
    pub fn requires_equal_length(self) -> bool {
        matches!(self, DistanceKind::Euclidean | DistanceKind::Hamming)
    }

    /// Coupling distances need at least one coupling, so they reject empty input.
    pub fn accepts_empty(self) -> bool {
        !matches!(self, DistanceKind::Dfd | DistanceKind::Dtw)
    }
}

impl fmt::Display for DistanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DistanceKind {
    type Err = DistanceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DistanceKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| DistanceError::UnknownKind(s.to_string()))
    }
}

/// Neutral gap element for an alphabet: the origin for vectors, NUL for symbols.
///
/// NUL never occurs in parsed data since the parsers reject control characters.
pub fn default_gap(alphabet: Alphabet) -> Element {
    match alphabet {
        Alphabet::Symbols => Element::Symbol('\0'),
        Alphabet::Vectors(d) => Element::Vector(Point::origin(d as usize).expect("valid dimension")),
    }
}

/// A distance kind together with its parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DistanceSpec {
    kind: DistanceKind,
    gap: Element,
}

impl DistanceSpec {
    pub fn new(kind: DistanceKind, alphabet: Alphabet) -> Self {
        DistanceSpec { kind, gap: default_gap(alphabet) }
    }

    /// Replaces the gap element used by ERP.
    pub fn with_gap(mut self, gap: Element) -> Self {
        self.gap = gap;
        self
    }

    pub fn kind(&self) -> DistanceKind {
        self.kind
    }

    pub fn gap(&self) -> Element {
        self.gap
    }

    pub fn alphabet(&self) -> Alphabet {
        self.gap.alphabet()
    }

    pub fn declared_metric(&self) -> bool {
        self.kind.is_metric()
    }

    pub fn declared_consistent(&self) -> bool {
        self.kind.is_consistent()
    }

    /// Checks that both inputs can be compared under this distance.
    pub fn check(&self, q: &[Element], x: &[Element]) -> Result<(), DistanceError> {
        let alphabet = self.alphabet();
        for e in q.first().into_iter().chain(x.first()) {
            if e.alphabet() != alphabet {
                return Err(SequenceError::KindMismatch { left: alphabet, right: e.alphabet() }.into());
            }
        }
        if self.kind.requires_equal_length() && q.len() != x.len() {
            return Err(DistanceError::LengthMismatch { kind: self.kind, left: q.len(), right: x.len() });
        }
        if !self.kind.accepts_empty() && (q.is_empty() || x.is_empty()) {
            return Err(DistanceError::Empty(self.kind));
        }
        Ok(())
    }

    pub fn eval(&self, q: &[Element], x: &[Element]) -> Result<f64, DistanceError> {
        self.check(q, x)?;
        Ok(self.eval_unchecked(q, x))
    }

    /// Evaluates without validating inputs; callers must have run [`DistanceSpec::check`] or
    /// an equivalent argument.
    pub(crate) fn eval_unchecked(&self, q: &[Element], x: &[Element]) -> f64 {
        match self.kind {
            DistanceKind::Euclidean => euclidean_raw(q, x),
            DistanceKind::Hamming => hamming_raw(q, x) as f64,
            DistanceKind::Levenshtein => levenshtein_raw(q, x) as f64,
            DistanceKind::Erp => erp_raw(q, x, &self.gap),
            DistanceKind::Dfd => coupling_raw(q, x, f64::max),
            DistanceKind::Dtw => coupling_raw(q, x, |acc, d| acc + d),
        }
    }

    /// Full dynamic-programming matrix over all prefix pairs.
    pub fn prefix_table(&self, q: &[Element], x: &[Element]) -> Result<PrefixTable, DistanceError> {
        let alphabet = self.alphabet();
        for e in q.first().into_iter().chain(x.first()) {
            if e.alphabet() != alphabet {
                return Err(SequenceError::KindMismatch { left: alphabet, right: e.alphabet() }.into());
            }
        }
        Ok(prefix_table_raw(self, q, x))
    }
}

impl fmt::Display for DistanceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            DistanceKind::Erp => write!(f, "erp(gap={:?})", self.gap),
            k => write!(f, "{k}"),
        }
    }
}

/// Distances between all prefix pairs of two sequences. Undefined cells hold `None`.
#[derive(Clone, Debug)]
pub struct PrefixTable {
    cols: usize,
    cells: Vec<f64>,
}

impl PrefixTable {
    /// Distance between the first `i` elements of the first input and the first `j` of the second.
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        let v = self.cells[i * self.cols + j];
        (!v.is_nan()).then_some(v)
    }

    pub fn rows(&self) -> usize {
        self.cells.len() / self.cols
    }

    pub fn cols(&self) -> usize {
        self.cols
    }
}

fn prefix_table_raw(spec: &DistanceSpec, q: &[Element], x: &[Element]) -> PrefixTable {
    let (n, m) = (q.len(), x.len());
    let cols = m + 1;
    let mut t = vec![f64::NAN; (n + 1) * cols];
    let at = |i: usize, j: usize| i * cols + j;
    match spec.kind {
        DistanceKind::Euclidean | DistanceKind::Hamming => {
            let mut acc = 0.0;
            t[0] = 0.0;
            for i in 1..=n.min(m) {
                if spec.kind == DistanceKind::Euclidean {
                    let d = ground(&q[i - 1], &x[i - 1]);
                    acc += d * d;
                    t[at(i, i)] = acc.sqrt();
                } else {
                    acc += f64::from(u8::from(q[i - 1] != x[i - 1]));
                    t[at(i, i)] = acc;
                }
            }
        }
        DistanceKind::Levenshtein | DistanceKind::Erp => {
            let lev = spec.kind == DistanceKind::Levenshtein;
            let gap_q = |i: usize| if lev { 1.0 } else { ground(&q[i], &spec.gap) };
            let gap_x = |j: usize| if lev { 1.0 } else { ground(&x[j], &spec.gap) };
            t[0] = 0.0;
            for j in 1..=m {
                t[at(0, j)] = t[at(0, j - 1)] + gap_x(j - 1);
            }
            for i in 1..=n {
                t[at(i, 0)] = t[at(i - 1, 0)] + gap_q(i - 1);
                for j in 1..=m {
                    let sub = if lev {
                        if q[i - 1] == x[j - 1] {
                            0.0
                        } else {
                            1.0
                        }
                    } else {
                        ground(&q[i - 1], &x[j - 1])
                    };
                    t[at(i, j)] = (t[at(i - 1, j - 1)] + sub)
                        .min(t[at(i - 1, j)] + gap_q(i - 1))
                        .min(t[at(i, j - 1)] + gap_x(j - 1));
                }
            }
        }
        DistanceKind::Dfd | DistanceKind::Dtw => {
            let combine = |acc: f64, d: f64| {
                if spec.kind == DistanceKind::Dfd {
                    acc.max(d)
                } else {
                    acc + d
                }
            };
            for i in 1..=n {
                for j in 1..=m {
                    let d = ground(&q[i - 1], &x[j - 1]);
                    let best = match (i, j) {
                        (1, 1) => {
                            t[at(1, 1)] = d;
                            continue;
                        }
                        (1, _) => t[at(1, j - 1)],
                        (_, 1) => t[at(i - 1, 1)],
                        _ => t[at(i - 1, j - 1)].min(t[at(i - 1, j)]).min(t[at(i, j - 1)]),
                    };
                    t[at(i, j)] = combine(best, d);
                }
            }
        }
    }
    PrefixTable { cols, cells: t }
}

fn euclidean_raw(q: &[Element], x: &[Element]) -> f64 {
    q.iter()
        .zip(x)
        .map(|(a, b)| {
            let d = ground(a, b);
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

fn hamming_raw(q: &[Element], x: &[Element]) -> usize {
    q.iter().zip(x).filter(|(a, b)| a != b).count()
}

fn levenshtein_raw(q: &[Element], x: &[Element]) -> usize {
    let mut prev: Vec<usize> = (0..=x.len()).collect();
    let mut cur = vec![0; x.len() + 1];
    for (i, a) in q.iter().enumerate() {
        cur[0] = i + 1;
        for (j, b) in x.iter().enumerate() {
            let sub = prev[j] + usize::from(a != b);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[x.len()]
}

fn erp_raw(q: &[Element], x: &[Element], gap: &Element) -> f64 {
    let gx: Vec<f64> = x.iter().map(|b| ground(b, gap)).collect();
    let mut prev = vec![0.0; x.len() + 1];
    for j in 0..x.len() {
        prev[j + 1] = prev[j] + gx[j];
    }
    let mut cur = vec![0.0; x.len() + 1];
    for a in q {
        let ga = ground(a, gap);
        cur[0] = prev[0] + ga;
        for (j, b) in x.iter().enumerate() {
            cur[j + 1] = (prev[j] + ground(a, b)).min(prev[j + 1] + ga).min(cur[j] + gx[j]);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[x.len()]
}

/// Shared recurrence of DTW (`combine = +`) and the discrete Fréchet distance (`combine = max`).
fn coupling_raw(q: &[Element], x: &[Element], combine: impl Fn(f64, f64) -> f64) -> f64 {
    let m = x.len();
    let mut prev = vec![f64::INFINITY; m];
    let mut cur = vec![f64::INFINITY; m];
    for (i, a) in q.iter().enumerate() {
        for (j, b) in x.iter().enumerate() {
            let d = ground(a, b);
            let best = match (i, j) {
                (0, 0) => {
                    cur[0] = d;
                    continue;
                }
                (0, _) => cur[j - 1],
                (_, 0) => prev[0],
                _ => prev[j - 1].min(prev[j]).min(cur[j - 1]),
            };
            cur[j] = combine(best, d);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[m - 1]
}

fn spec_for(kind: DistanceKind, q: &[Element], x: &[Element]) -> DistanceSpec {
    let alphabet = q.first().or(x.first()).map_or(Alphabet::Symbols, Element::alphabet);
    DistanceSpec::new(kind, alphabet)
}

/// Root of the summed squared element distances at aligned positions.
pub fn euclidean(q: &[Element], x: &[Element]) -> Result<f64, DistanceError> {
    spec_for(DistanceKind::Euclidean, q, x).eval(q, x)
}

/// Number of aligned positions holding different elements.
pub fn hamming(q: &[Element], x: &[Element]) -> Result<usize, DistanceError> {
    spec_for(DistanceKind::Hamming, q, x).check(q, x)?;
    Ok(hamming_raw(q, x))
}

/// Unit-cost edit distance.
pub fn levenshtein(q: &[Element], x: &[Element]) -> Result<usize, DistanceError> {
    spec_for(DistanceKind::Levenshtein, q, x).check(q, x)?;
    Ok(levenshtein_raw(q, x))
}

/// Edit distance with real penalty: matches cost the element distance, gaps cost the distance
/// to `gap`.
pub fn erp(q: &[Element], x: &[Element], gap: Element) -> Result<f64, DistanceError> {
    DistanceSpec::new(DistanceKind::Erp, gap.alphabet()).with_gap(gap).eval(q, x)
}

/// Discrete Fréchet distance (Eiter and Mannila recurrence).
pub fn dfd(q: &[Element], x: &[Element]) -> Result<f64, DistanceError> {
    spec_for(DistanceKind::Dfd, q, x).eval(q, x)
}

/// Dynamic time warping with the element distance as coupling cost.
pub fn dtw(q: &[Element], x: &[Element]) -> Result<f64, DistanceError> {
    spec_for(DistanceKind::Dtw, q, x).eval(q, x)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ViolationKind {
    Triangle,
    Symmetry,
    Identity,
    Consistency,
}

/// A counterexample to a distance property.
///
/// Witness and value layout per kind:
/// - `Triangle`: `[a, b, c]`, values `[d(a,c), d(a,b), d(b,c)]`
/// - `Symmetry`: `[a, b]`, values `[d(a,b), d(b,a)]`
/// - `Identity`: `[a]`, values `[d(a,a)]`
/// - `Consistency`: `[q, x, sx]`, values `[d(q,x), min over sq of d(sq,sx)]`
#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub witnesses: Vec<Vec<Element>>,
    pub values: Vec<f64>,
}

impl Violation {
    /// Recomputes the witness under `d` and reports whether the violation still shows.
    pub fn replay(&self, d: &DistanceSpec) -> bool {
        let w = &self.witnesses;
        let ev = |a: &[Element], b: &[Element]| d.eval(a, b).ok();
        match self.kind {
            ViolationKind::Triangle => match (ev(&w[0], &w[2]), ev(&w[0], &w[1]), ev(&w[1], &w[2])) {
                (Some(ac), Some(ab), Some(bc)) => ac > ab + bc + TOLERANCE,
                _ => false,
            },
            ViolationKind::Symmetry => match (ev(&w[0], &w[1]), ev(&w[1], &w[0])) {
                (Some(ab), Some(ba)) => (ab - ba).abs() > TOLERANCE,
                _ => false,
            },
            ViolationKind::Identity => ev(&w[0], &w[0]).is_some_and(|v| v > TOLERANCE),
            ViolationKind::Consistency => match ev(&w[0], &w[1]) {
                Some(whole) => best_subsequence_distance(d, &w[0], &w[2]) > whole + TOLERANCE,
                None => false,
            },
        }
    }
}

/// Smallest distance between `sx` and any contiguous piece of `q` (the empty piece included
/// when the distance accepts it). Infinite when no piece is comparable.
fn best_subsequence_distance(d: &DistanceSpec, q: &[Element], sx: &[Element]) -> f64 {
    let mut best = f64::INFINITY;
    if d.kind().accepts_empty() {
        if let Ok(v) = d.eval(&[], sx) {
            best = v;
        }
    }
    for s in 0..q.len() {
        for e in s + 1..=q.len() {
            if let Ok(v) = d.eval(&q[s..e], sx) {
                best = best.min(v);
            }
        }
    }
    best
}

/// Brute-force consistency check: every contiguous piece of `x` must have a contiguous piece of
/// `q` no farther from it than `q` is from `x`.
pub fn check_consistency(
    d: &DistanceSpec,
    q: &[Element],
    x: &[Element],
) -> Result<Vec<Violation>, DistanceError> {
    let longest = q.len().max(x.len());
    if longest > CONSISTENCY_BUDGET {
        return Err(DistanceError::BudgetExceeded(longest));
    }
    let whole = d.eval(q, x)?;
    let mut out = Vec::new();
    for s in 0..x.len() {
        for e in s + 1..=x.len() {
            let sx = &x[s..e];
            let best = best_subsequence_distance(d, q, sx);
            if best > whole + TOLERANCE {
                out.push(Violation {
                    kind: ViolationKind::Consistency,
                    witnesses: vec![q.to_vec(), x.to_vec(), sx.to_vec()],
                    values: vec![whole, best],
                });
            }
        }
    }
    Ok(out)
}

/// Checks identity (`d(a,a) = 0`), symmetry and all three triangle inequalities of each triple.
pub fn check_metric_axioms<'a, I>(d: &DistanceSpec, triples: I) -> Result<Vec<Violation>, DistanceError>
where
    I: IntoIterator<Item = (&'a [Element], &'a [Element], &'a [Element])>,
{
    let mut out = Vec::new();
    for (a, b, c) in triples {
        let pts = [a, b, c];
        for p in pts {
            let v = d.eval(p, p)?;
            if v > TOLERANCE {
                out.push(Violation { kind: ViolationKind::Identity, witnesses: vec![p.to_vec()], values: vec![v] });
            }
        }
        let mut dist = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    dist[i][j] = d.eval(pts[i], pts[j])?;
                }
            }
        }
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            if (dist[i][j] - dist[j][i]).abs() > TOLERANCE {
                out.push(Violation {
                    kind: ViolationKind::Symmetry,
                    witnesses: vec![pts[i].to_vec(), pts[j].to_vec()],
                    values: vec![dist[i][j], dist[j][i]],
                });
            }
        }
        // (start, middle, end): d(start,end) <= d(start,middle) + d(middle,end)
        for (s, m, e) in [(0, 1, 2), (0, 2, 1), (1, 0, 2)] {
            if dist[s][e] > dist[s][m] + dist[m][e] + TOLERANCE {
                out.push(Violation {
                    kind: ViolationKind::Triangle,
                    witnesses: vec![pts[s].to_vec(), pts[m].to_vec(), pts[e].to_vec()],
                    values: vec![dist[s][e], dist[s][m], dist[m][e]],
                });
            }
        }
    }
    Ok(out)
}

/// Random search for a triangle-inequality counterexample among short integer-valued series.
///
/// Returns the first violation found within `trials` random triples.
pub fn search_triangle_violation<R: Rng>(
    d: &DistanceSpec,
    rng: &mut R,
    trials: usize,
    max_len: usize,
    max_value: i32,
) -> Option<Violation> {
    let equal = d.kind().requires_equal_length();
    let series = |rng: &mut R, len: usize| -> Vec<Element> {
        let len = if equal { len } else { rng.gen_range(1..=max_len) };
        (0..len).map(|_| Element::scalar(rng.gen_range(0..=max_value) as f64)).collect()
    };
    for _ in 0..trials {
        let len = rng.gen_range(1..=max_len);
        let (a, b, c) = (series(rng, len), series(rng, len), series(rng, len));
        let found = check_metric_axioms(d, [(a.as_slice(), b.as_slice(), c.as_slice())]).ok()?;
        if let Some(v) = found.into_iter().find(|v| v.kind == ViolationKind::Triangle) {
            return Some(v);
        }
    }
    None
}
