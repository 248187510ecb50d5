//! Linear scan and maximum-variance reference indexing, for pruning comparisons against the
//! reference net.

use std::cmp::Ordering;
use std::io;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::distance::{DistanceError, DistanceSpec};
use crate::refnet::{ObjectId, ReferenceNet};
use crate::sequence::Element;

#[derive(Debug, Error)]
pub enum BaselineError {
    #[error("cannot pick {k} references from {available} objects")]
    TooManyReferences { k: usize, available: usize },
    #[error("{method} returned a different result than linear scan for query {query} at radius {radius}")]
    Mismatch { method: String, query: usize, radius: f64 },
    #[error(transparent)]
    Distance(#[from] DistanceError),
}

/// Distance evaluations spent by one range query over `total` objects.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct WorkCounter {
    pub computations: u64,
    pub total: u64,
}

impl WorkCounter {
    /// Fraction of evaluations avoided relative to a linear scan.
    pub fn alpha(&self) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        1.0 - self.computations as f64 / self.total as f64
    }
}

fn slack(eps: f64) -> f64 {
    1e-9 * eps.abs().max(1.0)
}

/// Ids of all objects within `eps` of `q`, ascending.
pub fn linear_scan_range(
    objects: &[Vec<Element>],
    q: &[Element],
    eps: f64,
    d: &DistanceSpec,
) -> Result<(Vec<ObjectId>, WorkCounter), BaselineError> {
    let mut ids = Vec::new();
    for (i, o) in objects.iter().enumerate() {
        if d.eval(q, o)? <= eps {
            ids.push(i as ObjectId);
        }
    }
    let n = objects.len() as u64;
    Ok((ids, WorkCounter { computations: n, total: n }))
}

/// Precomputed distances from every object to `k` reference objects.
#[derive(Clone, Debug)]
pub struct MvIndex {
    references: Vec<ObjectId>,
    /// Row `i` holds the distances from object `i` to each reference.
    table: Vec<f64>,
    distance: DistanceSpec,
}

/// Variance of each object's distances to the sample, and the median of all those distances.
fn sample_variances(objects: &[Vec<Element>], sample_ids: &[usize], d: &DistanceSpec) -> (Vec<f64>, f64) {
    let rows: Vec<Vec<f64>> = objects
        .par_iter()
        .map(|o| sample_ids.iter().map(|&s| d.eval_unchecked(o, &objects[s])).collect())
        .collect();
    let variances = rows
        .iter()
        .map(|r| {
            let n = r.len() as f64;
            let mean = r.iter().sum::<f64>() / n;
            r.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n
        })
        .collect();
    let mut all: Vec<f64> = rows.into_iter().flatten().collect();
    all.sort_by(f64::total_cmp);
    let median = all.get(all.len() / 2).copied().unwrap_or(0.0);
    (variances, median)
}

/// Picks `k` references greedily by decreasing variance of their distances to a random sample
/// of `sample_size` objects, skipping candidates within a tenth of the median sample distance
/// of an earlier pick. Remaining slots are then filled in variance order.
pub fn mv_select_references(
    objects: &[Vec<Element>],
    k: usize,
    sample_size: usize,
    seed: u64,
    d: &DistanceSpec,
) -> Result<Vec<ObjectId>, BaselineError> {
    let n = objects.len();
    if k > n {
        return Err(BaselineError::TooManyReferences { k, available: n });
    }
    if k == 0 {
        return Ok(Vec::new());
    }
    if let Some(o) = objects.first() {
        d.check(o, o)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sample_ids = sample(&mut rng, n, sample_size.clamp(1, n)).into_vec();
    let (variances, median) = sample_variances(objects, &sample_ids, d);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| variances[b].total_cmp(&variances[a]).then(a.cmp(&b)));

    let threshold = 0.1 * median;
    let mut picked: Vec<usize> = Vec::with_capacity(k);
    let mut taken = vec![false; n];
    for &c in &order {
        if picked.len() == k {
            break;
        }
        if picked.iter().all(|&p| d.eval_unchecked(&objects[p], &objects[c]) > threshold) {
            picked.push(c);
            taken[c] = true;
        }
    }
    for &c in &order {
        if picked.len() == k {
            break;
        }
        if !taken[c] {
            picked.push(c);
            taken[c] = true;
        }
    }
    Ok(picked.into_iter().map(|i| i as ObjectId).collect())
}

impl MvIndex {
    pub fn build(
        objects: &[Vec<Element>],
        k: usize,
        sample_size: usize,
        seed: u64,
        d: DistanceSpec,
    ) -> Result<Self, BaselineError> {
        let references = mv_select_references(objects, k, sample_size, seed, &d)?;
        Ok(Self::with_references(objects, references, d))
    }

    pub fn with_references(objects: &[Vec<Element>], references: Vec<ObjectId>, d: DistanceSpec) -> Self {
        let table = objects
            .par_iter()
            .flat_map_iter(|o| {
                references.iter().map(|&r| d.eval_unchecked(o, &objects[r as usize])).collect::<Vec<_>>()
            })
            .collect();
        MvIndex { references, table, distance: d }
    }

    pub fn references(&self) -> &[ObjectId] {
        &self.references
    }

    pub fn k(&self) -> usize {
        self.references.len()
    }

    /// Distance from object `i` to reference `r` (by position).
    pub fn table_entry(&self, i: usize, r: usize) -> f64 {
        self.table[i * self.k() + r]
    }

    pub fn len(&self) -> usize {
        self.table.len().checked_div(self.k()).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }
}

/// Range query against an [`MvIndex`]: objects are pruned or accepted through the triangle
/// inequality on each reference, and only the undecided ones are evaluated.
pub fn mv_range_query(
    mv: &MvIndex,
    objects: &[Vec<Element>],
    q: &[Element],
    eps: f64,
) -> Result<(Vec<ObjectId>, WorkCounter), BaselineError> {
    let k = mv.k();
    let mut to_ref = Vec::with_capacity(k);
    for &r in &mv.references {
        to_ref.push(mv.distance.eval(q, &objects[r as usize])?);
    }
    let s = slack(eps);
    let mut computations = k as u64;
    let mut ids = Vec::new();
    let mut is_ref = vec![usize::MAX; objects.len()];
    for (pos, &r) in mv.references.iter().enumerate() {
        is_ref[r as usize] = pos;
    }
    for (i, o) in objects.iter().enumerate() {
        if is_ref[i] != usize::MAX {
            if to_ref[is_ref[i]] <= eps {
                ids.push(i as ObjectId);
            }
            continue;
        }
        let row = &mv.table[i * k..(i + 1) * k];
        let mut pruned = false;
        let mut accepted = false;
        for (dq, t) in to_ref.iter().zip(row) {
            if (dq - t).abs() > eps + s {
                pruned = true;
                break;
            }
            if dq + t <= eps - s {
                accepted = true;
            }
        }
        if pruned {
            continue;
        }
        if !accepted {
            computations += 1;
            if mv.distance.eval_unchecked(q, o) > eps {
                continue;
            }
        }
        ids.push(i as ObjectId);
    }
    Ok((ids, WorkCounter { computations, total: objects.len() as u64 }))
}

/// Number of references that gives an MV table about as large as the net's parent links.
pub fn space_matched_k(net: &ReferenceNet) -> usize {
    let n = net.len();
    if n == 0 {
        return 1;
    }
    ((net.stats().entries as f64 / n as f64).round() as usize).max(1)
}

/// Mean pruning for one method at one radius.
#[derive(Clone, Debug, PartialEq)]
pub struct PruningRow {
    pub radius: f64,
    pub method: String,
    pub alpha: f64,
    pub mean_computations: f64,
}

/// Runs every query at every radius through the net, each MV index and a linear scan, and
/// checks that all result sets agree.
pub fn compare_pruning(
    objects: &[Vec<Element>],
    queries: &[Vec<Element>],
    radii: &[f64],
    net: &ReferenceNet,
    mvs: &[MvIndex],
) -> Result<Vec<PruningRow>, BaselineError> {
    let d = net.distance();
    let mut rows = Vec::new();
    for &radius in radii {
        let per_query: Vec<Result<Vec<WorkCounter>, BaselineError>> = queries
            .par_iter()
            .enumerate()
            .map(|(qi, q)| {
                let (truth, linear) = linear_scan_range(objects, q, radius, d)?;
                let r = net.range_query(q, radius);
                if r.ids() != truth {
                    return Err(BaselineError::Mismatch { method: "refnet".into(), query: qi, radius });
                }
                let mut counters =
                    vec![linear, WorkCounter { computations: r.computations, total: objects.len() as u64 }];
                for mv in mvs {
                    let (ids, c) = mv_range_query(mv, objects, q, radius)?;
                    if ids != truth {
                        return Err(BaselineError::Mismatch { method: format!("mv-{}", mv.k()), query: qi, radius });
                    }
                    counters.push(c);
                }
                Ok(counters)
            })
            .collect();
        let per_query = per_query.into_iter().collect::<Result<Vec<_>, _>>()?;
        let mut names = vec!["linear".to_string(), "refnet".to_string()];
        names.extend(mvs.iter().map(|mv| format!("mv-{}", mv.k())));
        for (m, name) in names.into_iter().enumerate() {
            let n = per_query.len().max(1) as f64;
            let alpha = per_query.iter().map(|c| c[m].alpha()).sum::<f64>() / n;
            let mean = per_query.iter().map(|c| c[m].computations as f64).sum::<f64>() / n;
            rows.push(PruningRow { radius, method: name, alpha, mean_computations: mean });
        }
    }
    rows.sort_by(|a, b| a.radius.partial_cmp(&b.radius).unwrap_or(Ordering::Equal));
    Ok(rows)
}

/// Writes `radius,method,alpha,mean_computations` rows with a header.
pub fn write_pruning_csv<W: io::Write>(out: &mut csv::Writer<W>, rows: &[PruningRow]) -> csv::Result<()> {
    out.write_record(["radius", "method", "alpha", "mean_computations"])?;
    for r in rows {
        out.write_record([r.radius.to_string(), r.method.clone(), r.alpha.to_string(), r.mean_computations.to_string()])?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distance::DistanceKind;
    use crate::refnet::NetConfig;
    use crate::sequence::{Alphabet, Point, Sequence};

    fn scalars(vs: &[f64]) -> Vec<Vec<Element>> {
        vs.iter().map(|&v| vec![Element::scalar(v)]).collect()
    }

    fn euclid() -> DistanceSpec {
        DistanceSpec::new(DistanceKind::Euclidean, Alphabet::Vectors(1))
    }

    #[test]
    fn linear_scan_basics() {
        let objs: Vec<Vec<Element>> =
            ["abcd", "abce", "zzzz"].iter().map(|s| Sequence::symbols("", s).elements().to_vec()).collect();
        let d = DistanceSpec::new(DistanceKind::Hamming, Alphabet::Symbols);
        let (ids, c) = linear_scan_range(&objs, &objs[1], 0.0, &d).unwrap();
        assert_eq!(ids, vec![1]);
        assert_eq!((c.computations, c.alpha()), (3, 0.0));
        assert_eq!(linear_scan_range(&objs, &objs[0], f64::INFINITY, &d).unwrap().0, vec![0, 1, 2]);
    }

    #[test]
    fn selection_bounds_and_determinism() {
        let objs = scalars(&[0.0, 1.0, 2.0, 3.0, 50.0]);
        assert!(matches!(
            mv_select_references(&objs, 6, 10, 1, &euclid()),
            Err(BaselineError::TooManyReferences { k: 6, available: 5 })
        ));
        let mut all = mv_select_references(&objs, 5, 10, 1, &euclid()).unwrap();
        all.sort_unstable();
        assert_eq!(all, vec![0, 1, 2, 3, 4]);
        assert_eq!(
            mv_select_references(&objs, 3, 3, 9, &euclid()).unwrap(),
            mv_select_references(&objs, 3, 3, 9, &euclid()).unwrap()
        );
    }

    #[test]
    fn highest_variance_window_is_chosen_first() {
        // A tight cluster plus a small far cluster in the plane. With the whole set as sample,
        // variances are computed here directly from the coordinates.
        let mut pts: Vec<(f64, f64)> = (0..20).map(|i| (i as f64 * 0.1, (i % 3) as f64 * 0.2)).collect();
        pts.extend([(100.0, 0.0), (100.0, 3.0), (97.0, 1.0)]);
        let objs: Vec<Vec<Element>> =
            pts.iter().map(|&(x, y)| vec![Element::Vector(Point::new(&[x, y]).unwrap())]).collect();
        let var: Vec<f64> = pts
            .iter()
            .map(|a| {
                let ds: Vec<f64> = pts.iter().map(|b| ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()).collect();
                let mean = ds.iter().sum::<f64>() / ds.len() as f64;
                ds.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / ds.len() as f64
            })
            .collect();
        let mut order: Vec<usize> = (0..pts.len()).collect();
        order.sort_by(|&a, &b| var[b].total_cmp(&var[a]));
        assert!(var[order[0]] - var[order[1]] > 1e-6, "clear winner");
        let d = DistanceSpec::new(DistanceKind::Euclidean, Alphabet::Vectors(2));
        let picked = mv_select_references(&objs, 1, objs.len(), 3, &d).unwrap();
        assert_eq!(picked, vec![order[0] as ObjectId]);
    }

    #[test]
    fn mv_matches_linear_scan() {
        let vs: Vec<f64> = (0..200).map(|i| ((i * 37) % 101) as f64 * 0.7).collect();
        let objs = scalars(&vs);
        let d = euclid();
        let mv = MvIndex::build(&objs, 4, 50, 7, d).unwrap();
        assert_eq!(mv.len(), 200);
        for (qi, q) in objs.iter().enumerate().step_by(13) {
            for eps in [0.0, 0.5, 3.0, 20.0, 1e6] {
                let (truth, _) = linear_scan_range(&objs, q, eps, &d).unwrap();
                let (ids, c) = mv_range_query(&mv, &objs, q, eps).unwrap();
                assert_eq!(ids, truth, "query {qi} eps {eps}");
                assert!(c.computations <= c.total);
            }
        }
        let (ids, _) = mv_range_query(&mv, &objs, &objs[5], 0.0).unwrap();
        assert!(ids.contains(&5));
    }

    #[test]
    fn comparison_rows() {
        let vs: Vec<f64> = (0..100).map(|i| (i as f64 * 1.3) % 40.0).collect();
        let objs = scalars(&vs);
        let d = euclid();
        let mut net = ReferenceNet::new(d, NetConfig::default()).unwrap();
        for (i, o) in objs.iter().enumerate() {
            net.insert(i as ObjectId, o.clone()).unwrap();
        }
        let k = space_matched_k(&net);
        let mv = MvIndex::build(&objs, k, 100, 1, d).unwrap();
        let rows = compare_pruning(&objs, &objs[..10], &[0.0, 1e9], &net, &[mv]).unwrap();
        assert_eq!(rows.len(), 6);
        // At a saturating radius every object is accepted from bounds alone.
        let saturated = |m: &str| rows.iter().find(|r| r.radius == 1e9 && r.method.starts_with(m)).unwrap();
        assert_eq!(saturated("mv").mean_computations, k as f64);
        assert!(saturated("refnet").mean_computations <= 2.0);
        assert!(rows.iter().filter(|r| r.method == "linear").all(|r| r.alpha == 0.0));
        let mut buf = csv::Writer::from_writer(Vec::new());
        write_pruning_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf.into_inner().unwrap()).unwrap();
        assert!(text.starts_with("radius,method,alpha,mean_computations\n"));
    }
}
