//! Line incidences with Cartesian products and exact collinear-triple counts.
//!
//! Lines are the graphs `l_{a,b} = {(x, y) : y = a x + b}` for `(a, b)` in
//! `F_p^2`; vertical lines are not part of the family.

use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{triple_count_bound, Regime};
use crate::error::{Error, Result};
use crate::field::{FieldContext, Subgroup};

/// Cap on `p^2` for a materialized [`LineHistogram`] (two bytes per cell).
pub const HISTOGRAM_CELL_LIMIT: u64 = 250_000_000;

/// Cap on each side of [`collinear_triples`].
pub const TRIPLES_SET_LIMIT: usize = 2000;

/// Cap on `|U_1| |U_2|` for [`collinear_triples_bruteforce`].
pub const BRUTEFORCE_LIMIT: usize = 64;

/// `iota(l_{a,b}) = |l_{a,b} ∩ (A x B)|` for every line, stored as one
/// dense row of `p` intercepts per slope.
#[derive(Debug, Clone)]
pub struct LineHistogram {
    p: u64,
    a_len: usize,
    b_len: usize,
    counts: Vec<u16>,
}

impl LineHistogram {
    #[inline]
    pub fn get(&self, slope: u64, intercept: u64) -> u32 {
        self.counts[(slope * self.p + intercept) as usize] as u32
    }

    pub fn row(&self, slope: u64) -> &[u16] {
        let start = (slope * self.p) as usize;
        &self.counts[start..start + self.p as usize]
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn set_sizes(&self) -> (usize, usize) {
        (self.a_len, self.b_len)
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&c| c as u64).sum()
    }

    pub fn max(&self) -> u32 {
        self.counts.iter().copied().max().unwrap_or(0) as u32
    }
}

fn check_nonempty(a: &[u64], b: &[u64]) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet);
    }
    Ok(())
}

/// Fills `row[b] = iota(l_{slope,b})` for the products `A x B` (points are
/// `(x, y)` with `x in A`, `y in B`).
fn fill_row<T: Copy + Default + std::ops::AddAssign + From<u8>>(
    ctx: &FieldContext,
    a: &[u64],
    b: &[u64],
    slope: u64,
    scaled_a: &mut Vec<u64>,
    row: &mut [T],
) {
    row.iter_mut().for_each(|c| *c = T::default());
    scaled_a.clear();
    scaled_a.extend(a.iter().map(|&x| ctx.mul(slope, x)));
    for &y in b {
        for &ax in scaled_a.iter() {
            row[ctx.sub(y, ax) as usize] += T::from(1u8);
        }
    }
}

/// Materializes the full incidence histogram of `A x B`.
pub fn line_histogram(ctx: &FieldContext, a: &[u64], b: &[u64]) -> Result<LineHistogram> {
    let a = ctx.normalize_set(a);
    let b = ctx.normalize_set(b);
    check_nonempty(&a, &b)?;
    let p = ctx.p();
    if p * p > HISTOGRAM_CELL_LIMIT {
        return Err(Error::TooLarge {
            what: "p^2 histogram cells",
            value: p * p,
            limit: HISTOGRAM_CELL_LIMIT,
        });
    }
    if a.len() > u16::MAX as usize {
        return Err(Error::TooLarge {
            what: "|A|",
            value: a.len() as u64,
            limit: u16::MAX as u64,
        });
    }
    let mut counts = vec![0u16; (p * p) as usize];
    counts
        .par_chunks_mut(p as usize)
        .enumerate()
        .for_each_init(Vec::new, |scratch, (slope, row)| {
            fill_row(ctx, &a, &b, slope as u64, scratch, row);
        });
    Ok(LineHistogram {
        p,
        a_len: a.len(),
        b_len: b.len(),
        counts,
    })
}

/// The three incidence moments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct IotaMoments {
    /// `sum iota(l_{a,b})`.
    pub first: u128,
    /// `sum iota(l_{lambda a, mu b})`.
    pub first_scaled: u128,
    /// `sum iota(l_{a,b}) iota(l_{lambda a, mu b})`.
    pub second: u128,
}

/// Streams over slopes, visiting rows `a` and `lambda a` together, so that
/// nothing larger than two rows is ever held in memory.
fn stream_pairs<F>(ctx: &FieldContext, a: &[u64], b: &[u64], lambda: u64, mu: u64, visit: F) -> Result<Vec<u128>>
where
    F: Fn(&[u32], &[u32], u64, &mut [u128]) + Sync,
{
    let lambda = ctx.reduce(lambda);
    let mu = ctx.reduce(mu);
    if lambda == 0 || mu == 0 {
        return Err(Error::ZeroScalar);
    }
    let a = ctx.normalize_set(a);
    let b = ctx.normalize_set(b);
    check_nonempty(&a, &b)?;
    let p = ctx.p();
    let acc = (0..p)
        .into_par_iter()
        .fold(
            || (vec![0u32; p as usize], vec![0u32; p as usize], Vec::new(), vec![0u128; 3]),
            |(mut row, mut scaled_row, mut scratch, mut acc), slope| {
                fill_row(ctx, &a, &b, slope, &mut scratch, &mut row);
                fill_row(ctx, &a, &b, ctx.mul(lambda, slope), &mut scratch, &mut scaled_row);
                visit(&row, &scaled_row, mu, &mut acc);
                (row, scaled_row, scratch, acc)
            },
        )
        .map(|(_, _, _, acc)| acc)
        .reduce(
            || vec![0u128; 3],
            |mut x, y| {
                x.iter_mut().zip(y).for_each(|(l, r)| *l += r);
                x
            },
        );
    Ok(acc)
}

/// Computes the first and second incidence moments for dilation by
/// `(lambda, mu)`.
pub fn iota_moments(ctx: &FieldContext, a: &[u64], b: &[u64], lambda: u64, mu: u64) -> Result<IotaMoments> {
    let acc = stream_pairs(ctx, a, b, lambda, mu, |row, scaled, mu, acc| {
        let mut intercept_mu = 0u64;
        let p = row.len() as u64;
        for &r in row.iter() {
            let s = scaled[intercept_mu as usize] as u128;
            acc[0] += r as u128;
            acc[1] += s;
            acc[2] += r as u128 * s;
            intercept_mu += mu;
            if intercept_mu >= p {
                intercept_mu -= p;
            }
        }
    })?;
    Ok(IotaMoments {
        first: acc[0],
        first_scaled: acc[1],
        second: acc[2],
    })
}

/// Closed form of [`IotaMoments::second`].
///
/// Writing `r = |A ∩ lambda mu^{-1} A|` and `s = |B ∩ mu B|`, the pair
/// `(a, b)` is determined uniquely by a quadruple `(u, v, x, y)` unless
/// `mu u = lambda x`, in which case there are `p` solutions when `y = mu v`
/// and none otherwise. Hence `M_2 = (|A|^2 - r)|B|^2 + p r s`, which reduces
/// to `|A|^2|B|^2 - |A||B|^2 + p|A||B|` when `lambda = mu = 1`.
pub fn second_moment_closed_form(ctx: &FieldContext, a: &[u64], b: &[u64], lambda: u64, mu: u64) -> Result<u128> {
    let lambda = ctx.reduce(lambda);
    let mu = ctx.reduce(mu);
    if lambda == 0 || mu == 0 {
        return Err(Error::ZeroScalar);
    }
    let a = ctx.normalize_set(a);
    let b = ctx.normalize_set(b);
    check_nonempty(&a, &b)?;
    let ratio = ctx.mul(lambda, ctx.inv(mu)?);
    let r = ctx.dilate_set(&a, ratio)?.iter().filter(|x| a.binary_search(x).is_ok()).count() as u128;
    let s = ctx.dilate_set(&b, mu)?.iter().filter(|y| b.binary_search(y).is_ok()).count() as u128;
    let (na, nb, p) = (a.len() as u128, b.len() as u128, ctx.p() as u128);
    Ok((na * na - r) * nb * nb + p * r * s)
}

/// `sum_{(a,b)} iota(l_{a,b}) iota(l_{lambda a, mu b})^2`.
pub fn iota_cube_sum(ctx: &FieldContext, a: &[u64], b: &[u64], lambda: u64, mu: u64) -> Result<u128> {
    let acc = stream_pairs(ctx, a, b, lambda, mu, |row, scaled, mu, acc| {
        let mut intercept_mu = 0u64;
        let p = row.len() as u64;
        for &r in row.iter() {
            let s = scaled[intercept_mu as usize] as u128;
            acc[0] += r as u128 * s * s;
            intercept_mu += mu;
            if intercept_mu >= p {
                intercept_mu -= p;
            }
        }
    })?;
    Ok(acc[0])
}

fn validate_side(ctx: &FieldContext, set: &[u64], scalar: u64) -> Result<(Vec<u64>, u64)> {
    let scalar = ctx.reduce(scalar);
    if scalar == 0 {
        return Err(Error::ZeroScalar);
    }
    let set = ctx.normalize_set(set);
    if set.first() == Some(&0) {
        return Err(Error::ZeroArgument);
    }
    Ok((set, scalar))
}

/// `h(r) = #{(u, v, w) in U^3 : u != lambda w, (u - lambda v)/(u - lambda w) = r}`.
pub fn ratio_histogram(ctx: &FieldContext, set: &[u64], lambda: u64) -> Vec<u64> {
    let p = ctx.p() as usize;
    let scaled: Vec<u64> = set.iter().map(|&v| ctx.mul(lambda, v)).collect();
    set.par_iter()
        .fold(
            || vec![0u64; p],
            |mut hist, &u| {
                let numerators: Vec<u64> = scaled.iter().map(|&lv| ctx.sub(u, lv)).collect();
                for &lw in &scaled {
                    let den = ctx.sub(u, lw);
                    if den == 0 {
                        continue;
                    }
                    let inv = ctx.inv(den).expect("nonzero denominator");
                    for &num in &numerators {
                        hist[ctx.mul(num, inv) as usize] += 1;
                    }
                }
                hist
            },
        )
        .reduce(
            || vec![0u64; p],
            |mut x, y| {
                x.iter_mut().zip(y).for_each(|(l, r)| *l += r);
                x
            },
        )
}

/// Exact `T_{lambda_1, lambda_2}(U_1, U_2)` as `sum_r h_1(r) h_2(r)`.
///
/// A 6-tuple is counted when both denominators `u_i - lambda_i w_i` are
/// nonzero; numerators may vanish, making 0 a legal common ratio.
pub fn collinear_triples(ctx: &FieldContext, u1: &[u64], u2: &[u64], lambda1: u64, lambda2: u64) -> Result<u128> {
    let (u1, lambda1) = validate_side(ctx, u1, lambda1)?;
    let (u2, lambda2) = validate_side(ctx, u2, lambda2)?;
    for side in [&u1, &u2] {
        if side.len() > TRIPLES_SET_LIMIT {
            return Err(Error::TooLarge {
                what: "|U_i|",
                value: side.len() as u64,
                limit: TRIPLES_SET_LIMIT as u64,
            });
        }
    }
    if u1.is_empty() || u2.is_empty() {
        return Ok(0);
    }
    let h1 = ratio_histogram(ctx, &u1, lambda1);
    let h2 = if u1 == u2 && lambda1 == lambda2 {
        h1.clone()
    } else {
        ratio_histogram(ctx, &u2, lambda2)
    };
    Ok(h1.iter().zip(&h2).map(|(&x, &y)| x as u128 * y as u128).sum())
}

/// Literal six-fold enumeration of the defining equation, cross-multiplied
/// so that no inverse is ever taken.
pub fn collinear_triples_bruteforce(
    ctx: &FieldContext,
    u1: &[u64],
    u2: &[u64],
    lambda1: u64,
    lambda2: u64,
) -> Result<u128> {
    let (u1, l1) = validate_side(ctx, u1, lambda1)?;
    let (u2, l2) = validate_side(ctx, u2, lambda2)?;
    if u1.len() * u2.len() > BRUTEFORCE_LIMIT {
        return Err(Error::TooLarge {
            what: "|U_1||U_2|",
            value: (u1.len() * u2.len()) as u64,
            limit: BRUTEFORCE_LIMIT as u64,
        });
    }
    let mut count = 0u128;
    for &a1 in &u1 {
        for &b1 in &u1 {
            for &c1 in &u1 {
                let num1 = ctx.sub(a1, ctx.mul(l1, b1));
                let den1 = ctx.sub(a1, ctx.mul(l1, c1));
                if den1 == 0 {
                    continue;
                }
                for &a2 in &u2 {
                    for &b2 in &u2 {
                        for &c2 in &u2 {
                            let num2 = ctx.sub(a2, ctx.mul(l2, b2));
                            let den2 = ctx.sub(a2, ctx.mul(l2, c2));
                            if den2 == 0 {
                                continue;
                            }
                            if ctx.mul(num1, den2) == ctx.mul(num2, den1) {
                                count += 1;
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(count)
}

/// `T_lambda(G)` next to its main term and the piecewise deviation bound.
#[derive(Debug, Clone, Serialize)]
pub struct TripleCountReport {
    pub p: u64,
    pub order: u64,
    pub lambda: u64,
    pub t: u128,
    pub main_term: f64,
    pub deviation: f64,
    pub regime: Regime,
    pub regime_bound: f64,
    pub ratio: f64,
}

/// Builds the report for `T_lambda(G) = T_{1,lambda}(G, G)`.
pub fn triple_deviation_report(ctx: &FieldContext, g: &Subgroup, lambda: u64) -> Result<TripleCountReport> {
    let t = collinear_triples(ctx, g.elements(), g.elements(), 1, lambda)?;
    let p = ctx.p();
    let n = g.order() as f64;
    let main_term = n.powi(6) / p as f64;
    let deviation = (t as f64 - main_term).abs();
    let (regime_bound, regime) = triple_count_bound(p, g.order());
    Ok(TripleCountReport {
        p,
        order: g.order(),
        lambda: ctx.reduce(lambda),
        t,
        main_term,
        deviation,
        regime,
        regime_bound,
        ratio: deviation / regime_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::make_field;

    #[test]
    fn histogram_total_matches_first_moment() {
        let ctx = make_field(5).unwrap();
        let hist = line_histogram(&ctx, &[1, 2], &[1, 2]).unwrap();
        assert_eq!(hist.total(), 20);
    }

    #[test]
    fn origin_lies_on_every_line_through_zero() {
        let ctx = make_field(7).unwrap();
        let hist = line_histogram(&ctx, &[0], &[0]).unwrap();
        for slope in 0..7 {
            for intercept in 0..7 {
                assert_eq!(hist.get(slope, intercept), (intercept == 0) as u32);
            }
        }
    }

    #[test]
    fn full_grid_meets_every_line_p_times() {
        let ctx = make_field(7).unwrap();
        let all: Vec<u64> = (0..7).collect();
        let hist = line_histogram(&ctx, &all, &all).unwrap();
        assert!(hist.counts.iter().all(|&c| c == 7));
    }

    #[test]
    fn histogram_rejects_empty_sets() {
        let ctx = make_field(7).unwrap();
        assert_eq!(line_histogram(&ctx, &[], &[1]).unwrap_err(), Error::EmptySet);
        assert_eq!(iota_cube_sum(&ctx, &[], &[], 1, 1).unwrap_err(), Error::EmptySet);
    }

    #[test]
    fn moment_examples() {
        let ctx = make_field(5).unwrap();
        let m = iota_moments(&ctx, &[1, 2], &[1, 2], 1, 1).unwrap();
        assert_eq!((m.first, m.first_scaled, m.second), (20, 20, 28));

        let ctx = make_field(7).unwrap();
        let m = iota_moments(&ctx, &[3], &[5], 2, 3).unwrap();
        // The point (3, 5) lies on both y = ax + b and y = 2ax + 3b only for a = 1.
        assert_eq!(m.second, 1);
        assert_eq!(second_moment_closed_form(&ctx, &[3], &[5], 2, 3).unwrap(), 1);
        assert_eq!(iota_moments(&ctx, &[3], &[5], 0, 3).unwrap_err(), Error::ZeroScalar);
    }

    fn iota_direct(ctx: &FieldContext, a: &[u64], b: &[u64], slope: u64, intercept: u64) -> u128 {
        let mut n = 0;
        for &x in a {
            for &y in b {
                if y == ctx.add(ctx.mul(slope, x), intercept) {
                    n += 1;
                }
            }
        }
        n
    }

    #[test]
    fn moments_match_direct_line_count() {
        let ctx = make_field(11).unwrap();
        let (a, b) = ([0u64, 2, 3, 7], [1u64, 4, 10]);
        for (lambda, mu) in [(1, 1), (3, 5), (2, 2), (10, 1)] {
            let (mut m1, mut m2) = (0u128, 0u128);
            for s in 0..11 {
                for t in 0..11 {
                    let i = iota_direct(&ctx, &a, &b, s, t);
                    m1 += i;
                    m2 += i * iota_direct(&ctx, &a, &b, ctx.mul(lambda, s), ctx.mul(mu, t));
                }
            }
            let m = iota_moments(&ctx, &a, &b, lambda, mu).unwrap();
            assert_eq!((m.first, m.first_scaled, m.second), (m1, 11 * 12, m2));
            assert_eq!(second_moment_closed_form(&ctx, &a, &b, lambda, mu).unwrap(), m2);
        }
    }

    #[test]
    fn single_point_cube_sum() {
        let ctx = make_field(5).unwrap();
        assert_eq!(iota_cube_sum(&ctx, &[1], &[1], 1, 1).unwrap(), 5);
    }

    #[test]
    fn triple_examples() {
        let ctx = make_field(5).unwrap();
        assert_eq!(collinear_triples(&ctx, &[1], &[1], 1, 1).unwrap(), 0);
        assert_eq!(collinear_triples(&ctx, &[1, 2], &[1, 2], 1, 1).unwrap(), 8);
        assert_eq!(collinear_triples_bruteforce(&ctx, &[1, 2], &[1, 2], 1, 1).unwrap(), 8);
        let h = ratio_histogram(&ctx, &[1, 2], 1);
        assert_eq!(h, vec![2, 2, 0, 0, 0]);

        let ctx = make_field(7).unwrap();
        let g = ctx.subgroup(3).unwrap();
        assert_eq!(
            collinear_triples(&ctx, g.elements(), g.elements(), 1, 3).unwrap(),
            collinear_triples_bruteforce(&ctx, g.elements(), g.elements(), 1, 3).unwrap()
        );
        assert_eq!(
            collinear_triples(&ctx, &[1], &[1, 2, 3], 2, 1).unwrap(),
            collinear_triples_bruteforce(&ctx, &[1], &[1, 2, 3], 2, 1).unwrap()
        );
    }

    #[test]
    fn triple_errors() {
        let ctx = make_field(7).unwrap();
        assert_eq!(collinear_triples(&ctx, &[1], &[1], 0, 1).unwrap_err(), Error::ZeroScalar);
        assert_eq!(collinear_triples(&ctx, &[0, 1], &[1], 1, 1).unwrap_err(), Error::ZeroArgument);
        let big: Vec<u64> = (1..=9).collect();
        let ctx = make_field(11).unwrap();
        assert!(matches!(
            collinear_triples_bruteforce(&ctx, &big, &big, 1, 1),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn report_for_small_subgroup() {
        let ctx = make_field(13).unwrap();
        let g = ctx.subgroup(3).unwrap();
        assert_eq!(g.elements(), &[1, 3, 9]);
        let report = triple_deviation_report(&ctx, &g, 1).unwrap();
        let oracle = collinear_triples_bruteforce(&ctx, g.elements(), g.elements(), 1, 1).unwrap();
        assert_eq!(report.t, oracle);
        assert!(report.ratio.is_finite());
        assert_eq!(report.regime, Regime::Small);
    }
}
