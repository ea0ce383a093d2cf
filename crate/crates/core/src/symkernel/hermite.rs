//! Row Hermite normal form over the operator-polynomial ring, used to decide
//! membership in the module spanned by a set of constraint vectors.

use super::oppoly::OpPoly;

/// A reduced basis row together with its pivot column.
#[derive(Clone, Debug, PartialEq)]
pub struct HermiteRow {
    pub pivot: usize,
    pub row: Vec<OpPoly>,
}

fn axpy(target: &mut [OpPoly], q: &OpPoly, src: &[OpPoly]) {
    for (t, s) in target.iter_mut().zip(src) {
        if !s.is_zero() {
            *t = &*t - &(q * s);
        }
    }
}

/// Hermite normal form of the row module spanned by `basis`.
///
/// Pivots are monic and every entry above a pivot has smaller degree than the
/// pivot. Ties in the Euclidean step go to the lowest row index.
pub fn hermite_form(basis: &[Vec<OpPoly>]) -> Vec<HermiteRow> {
    let width = basis.first().map_or(0, |r| r.len());
    let mut rows: Vec<Vec<OpPoly>> = basis
        .iter()
        .filter(|r| r.iter().any(|e| !e.is_zero()))
        .cloned()
        .collect();
    let mut out: Vec<HermiteRow> = Vec::new();
    for col in 0..width {
        loop {
            let live: Vec<usize> = (0..rows.len())
                .filter(|&i| !rows[i][col].is_zero())
                .collect();
            if live.len() <= 1 {
                break;
            }
            let p = *live
                .iter()
                .min_by_key(|&&i| rows[i][col].degree())
                .expect("nonempty");
            let pivot = rows[p].clone();
            for &i in live.iter().filter(|&&i| i != p) {
                let (q, _) = rows[i][col].div_rem(&pivot[col]).expect("pivot is nonzero");
                axpy(&mut rows[i], &q, &pivot);
            }
        }
        let Some(p) = (0..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        let mut pivot = rows.remove(p);
        let inv = pivot[col]
            .leading_coeff()
            .recip()
            .expect("nonzero leading coefficient");
        for e in &mut pivot {
            *e = e.scale(&inv);
        }
        for prev in &mut out {
            let (q, _) = prev.row[col]
                .div_rem(&pivot[col])
                .expect("pivot is nonzero");
            if !q.is_zero() {
                axpy(&mut prev.row, &q, &pivot);
            }
        }
        out.push(HermiteRow {
            pivot: col,
            row: pivot,
        });
        rows.retain(|r| r.iter().any(|e| !e.is_zero()));
    }
    out
}

/// Remainder of `v` modulo the module spanned by `basis`; zero exactly when
/// `v` is an operator-polynomial combination of basis rows.
pub fn hermite_reduce(v: &[OpPoly], basis: &[Vec<OpPoly>]) -> Vec<OpPoly> {
    reduce_with(v, &hermite_form(basis))
}

/// Reduce against a precomputed Hermite form.
pub fn reduce_with(v: &[OpPoly], form: &[HermiteRow]) -> Vec<OpPoly> {
    let mut r = v.to_vec();
    for h in form {
        let (q, _) = r[h.pivot]
            .div_rem(&h.row[h.pivot])
            .expect("pivot is nonzero");
        if !q.is_zero() {
            axpy(&mut r, &q, &h.row);
        }
    }
    r
}
