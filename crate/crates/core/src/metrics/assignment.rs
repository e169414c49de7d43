//! Exact `W1` between equal-size uniform-weight atom clouds.

use crate::error::{Error, Result};
use crate::measure::{Atom, EmpiricalMeasure};
use crate::scalar::{as_f64, cast, count, tree_sum, Scalar};
use std::collections::BTreeMap;

/// Minimum-cost perfect matching on a square `n × n` row-major cost matrix
/// (Kuhn–Munkres with potentials, `O(n³)`).
///
/// Returns the column assigned to each row and the total cost.
pub fn min_cost_assignment<T: Scalar>(cost: &[T], n: usize) -> Result<(Vec<usize>, T)> {
    if cost.len() != n * n {
        return Err(Error::InvalidParameter(format!(
            "cost matrix has {} entries, expected {}",
            cost.len(),
            n * n
        )));
    }
    if n == 0 {
        return Ok((Vec::new(), T::zero()));
    }
    if let Some(c) = cost.iter().find(|c| !c.is_finite()) {
        return Err(Error::InvalidParameter(format!("non-finite cost {}", as_f64(*c))));
    }
    // 1-based rows/columns; column 0 is the virtual start
    let a = |i: usize, j: usize| cost[(i - 1) * n + (j - 1)];
    let mut u = vec![T::zero(); n + 1];
    let mut v = vec![T::zero(); n + 1];
    let mut row_of = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    let mut minv = vec![T::zero(); n + 1];
    let mut used = vec![false; n + 1];
    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0usize;
        minv.iter_mut().for_each(|m| *m = T::infinity());
        used.iter_mut().for_each(|x| *x = false);
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = T::infinity();
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = a(i0, j) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0usize; n];
    for j in 1..=n {
        assignment[row_of[j] - 1] = j - 1;
    }
    let chosen: Vec<T> = assignment
        .iter()
        .enumerate()
        .map(|(i, &j)| cost[i * n + j])
        .collect();
    Ok((assignment, tree_sum(&chosen)))
}

fn uniform_pair<T: Scalar>(a: &EmpiricalMeasure<T>, b: &EmpiricalMeasure<T>) -> Result<T> {
    if a.len() != b.len() {
        return Err(Error::UnequalSupport(format!(
            "{} atoms vs {} atoms",
            a.len(),
            b.len()
        )));
    }
    let n = a.len();
    let tol = T::epsilon() * cast(64.0);
    if !a.has_uniform_weights(tol) || !b.has_uniform_weights(tol) {
        return Err(Error::UnequalSupport("atom weights are not uniform".into()));
    }
    let scale = a.total_mass().max(b.total_mass());
    if (a.total_mass() - b.total_mass()).abs() > tol * count(n.max(1)) * scale {
        return Err(Error::UnequalSupport(format!(
            "total masses {} and {} differ",
            as_f64(a.total_mass()),
            as_f64(b.total_mass())
        )));
    }
    Ok(if n == 0 { T::zero() } else { a.total_mass() / count(n) })
}

fn ground<T: Scalar>(x: &Atom<T>, y: &Atom<T>) -> T {
    (x.theta - y.theta).hypot(x.omega - y.omega)
}

/// Exact `W1` with ground cost `|(θ − θ*, Ω − Ω*)|`.
pub fn w1_empirical<T: Scalar>(a: &EmpiricalMeasure<T>, b: &EmpiricalMeasure<T>) -> Result<T> {
    let w = uniform_pair(a, b)?;
    let n = a.len();
    let mut cost = Vec::with_capacity(n * n);
    for x in a.atoms() {
        for y in b.atoms() {
            cost.push(ground(x, y));
        }
    }
    let (_, total) = min_cost_assignment(&cost, n)?;
    Ok(w * total)
}

/// Transport cost of the plan that keeps every atom on its own frequency
/// and matches sorted phases within each frequency.
///
/// Needs the two frequency multisets to agree. The value is the `W1` of a
/// feasible plan, so it bounds [`w1_empirical`] from above.
pub fn w1_fiberwise<T: Scalar>(a: &EmpiricalMeasure<T>, b: &EmpiricalMeasure<T>) -> Result<T> {
    let w = uniform_pair(a, b)?;
    let group = |m: &EmpiricalMeasure<T>| {
        let mut out: BTreeMap<u64, Vec<T>> = BTreeMap::new();
        for x in m.atoms() {
            out.entry(as_f64(x.omega).to_bits()).or_default().push(x.theta);
        }
        for v in out.values_mut() {
            v.sort_by(|p, q| p.partial_cmp(q).expect("finite phases"));
        }
        out
    };
    let ga = group(a);
    let gb = group(b);
    let mut gaps = Vec::with_capacity(a.len());
    for (key, xs) in &ga {
        let ys = gb.get(key).filter(|ys| ys.len() == xs.len()).ok_or_else(|| {
            Error::UnequalSupport(format!(
                "frequency {} is not matched atom for atom",
                f64::from_bits(*key)
            ))
        })?;
        gaps.extend(xs.iter().zip(ys).map(|(x, y)| (*x - *y).abs()));
    }
    if gaps.len() != b.len() {
        return Err(Error::UnequalSupport("frequency multisets differ".into()));
    }
    Ok(w * tree_sum(&gaps))
}
