//! Independent reference implementations for integration tests.
//!
//! Distances here enumerate every edit script or coupling instead of running a dynamic
//! program, so they share no code path with the library.

#![allow(dead_code)]

use rand::Rng;
use subseq::sequence::{Alphabet, Element};

pub fn syms(text: &str) -> Vec<Element> {
    text.chars().map(Element::Symbol).collect()
}

pub fn scalars(values: &[f64]) -> Vec<Element> {
    values.iter().map(|&v| Element::scalar(v)).collect()
}

/// Every sequence of length `0..=max_len` over `k` symbols (`a`, `b`, ...) or scalar values
/// (`0.0`, `1.0`, ...).
pub fn all_sequences(alphabet: Alphabet, k: usize, max_len: usize) -> Vec<Vec<Element>> {
    let letter = |i: usize| match alphabet {
        Alphabet::Symbols => Element::Symbol((b'a' + i as u8) as char),
        Alphabet::Vectors(_) => Element::scalar(i as f64),
    };
    let mut out = vec![Vec::new()];
    let mut layer = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for s in &layer {
            for i in 0..k {
                let mut t: Vec<Element> = s.clone();
                t.push(letter(i));
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

fn ground(a: &Element, b: &Element) -> f64 {
    match (a, b) {
        (Element::Symbol(x), Element::Symbol(y)) => f64::from(u8::from(x != y)),
        (Element::Vector(p), Element::Vector(q)) => {
            p.coords().iter().zip(q.coords()).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt()
        }
        _ => panic!("mixed element kinds"),
    }
}

pub fn direct_hamming(q: &[Element], x: &[Element]) -> f64 {
    assert_eq!(q.len(), x.len());
    q.iter().zip(x).filter(|(a, b)| a != b).count() as f64
}

pub fn direct_euclidean(q: &[Element], x: &[Element]) -> f64 {
    assert_eq!(q.len(), x.len());
    q.iter().zip(x).map(|(a, b)| ground(a, b).powi(2)).sum::<f64>().sqrt()
}

/// Minimum over all edit scripts. Each step keeps, substitutes, deletes from `q` or inserts
/// from `x`; `del`/`ins` give the price of the removed or added element.
fn min_edit_script(
    q: &[Element],
    x: &[Element],
    sub: &dyn Fn(&Element, &Element) -> f64,
    gap: &dyn Fn(&Element) -> f64,
) -> f64 {
    fn walk(
        q: &[Element],
        x: &[Element],
        spent: f64,
        best: &mut f64,
        sub: &dyn Fn(&Element, &Element) -> f64,
        gap: &dyn Fn(&Element) -> f64,
    ) {
        match (q.split_first(), x.split_first()) {
            (None, None) => *best = best.min(spent),
            (Some((a, qr)), None) => walk(qr, x, spent + gap(a), best, sub, gap),
            (None, Some((b, xr))) => walk(q, xr, spent + gap(b), best, sub, gap),
            (Some((a, qr)), Some((b, xr))) => {
                walk(qr, xr, spent + sub(a, b), best, sub, gap);
                walk(qr, x, spent + gap(a), best, sub, gap);
                walk(q, xr, spent + gap(b), best, sub, gap);
            }
        }
    }
    let mut best = f64::INFINITY;
    walk(q, x, 0.0, &mut best, sub, gap);
    best
}

pub fn script_levenshtein(q: &[Element], x: &[Element]) -> f64 {
    min_edit_script(q, x, &|a, b| f64::from(u8::from(a != b)), &|_| 1.0)
}

pub fn script_erp(q: &[Element], x: &[Element], gap: &Element) -> f64 {
    min_edit_script(q, x, &ground, &|e| ground(e, gap))
}

/// Folds every monotone, continuous coupling from `(0,0)` to `(n-1,m-1)` with `combine` and
/// returns the minimum.
fn min_coupling(q: &[Element], x: &[Element], combine: fn(f64, f64) -> f64) -> f64 {
    fn walk(q: &[Element], x: &[Element], i: usize, j: usize, acc: f64, best: &mut f64, combine: fn(f64, f64) -> f64) {
        let acc = combine(acc, ground(&q[i], &x[j]));
        if i + 1 == q.len() && j + 1 == x.len() {
            *best = best.min(acc);
            return;
        }
        if i + 1 < q.len() {
            walk(q, x, i + 1, j, acc, best, combine);
        }
        if j + 1 < x.len() {
            walk(q, x, i, j + 1, acc, best, combine);
        }
        if i + 1 < q.len() && j + 1 < x.len() {
            walk(q, x, i + 1, j + 1, acc, best, combine);
        }
    }
    assert!(!q.is_empty() && !x.is_empty());
    let mut best = f64::INFINITY;
    // Ground distances are non-negative, so 0 is neutral for both `max` and `+`.
    walk(q, x, 0, 0, 0.0, &mut best, combine);
    best
}

pub fn coupling_dfd(q: &[Element], x: &[Element]) -> f64 {
    min_coupling(q, x, f64::max)
}

pub fn coupling_dtw(q: &[Element], x: &[Element]) -> f64 {
    min_coupling(q, x, |a, b| a + b)
}

/// Shared shape of random test series: integer levels `0..values` so distances are exact.
pub fn random_series<R: Rng>(rng: &mut R, len: usize, values: u32) -> Vec<Element> {
    (0..len).map(|_| Element::scalar(f64::from(rng.gen_range(0..values)))).collect()
}

pub fn random_text<R: Rng>(rng: &mut R, len: usize, letters: u8) -> Vec<Element> {
    (0..len).map(|_| Element::Symbol((b'a' + rng.gen_range(0..letters)) as char)).collect()
}

/// Positions (into `objects`) within `eps` of `q` by direct evaluation.
pub fn linear_range(
    objects: &[Vec<Element>],
    q: &[Element],
    eps: f64,
    distance: impl Fn(&[Element], &[Element]) -> f64,
) -> Vec<u32> {
    objects.iter().enumerate().filter(|(_, o)| distance(q, o) <= eps).map(|(i, _)| i as u32).collect()
}
