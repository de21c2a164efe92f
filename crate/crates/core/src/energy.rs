//! Multiplicative energy, difference-product counts, and the link between
//! collinear triples of subgroups and the energy of their translates.

use serde::Serialize;

use crate::bounds::{shifted_energy_bound, Regime};
use crate::error::{Error, Result};
use crate::field::{FieldContext, Subgroup};
use crate::incidence::collinear_triples;
use crate::ntt;

/// Cap on `|U|` for [`d_times`].
pub const D_TIMES_LIMIT: usize = 5000;

/// Cap on subgroup orders for [`t_energy_relation`].
pub const RELATION_LIMIT: u64 = 500;

/// Cap on the subgroup order for [`energy_deviation_report`].
pub const ENERGY_REPORT_LIMIT: u64 = 5000;

/// Cap on `|U|` for [`dx_vs_t_check`].
pub const DX_CHECK_LIMIT: usize = 300;

/// `E(U, V)`: solutions of `u_1 v_1 = u_2 v_2`. Zero elements are allowed
/// and products are taken literally mod p.
pub fn mult_energy(ctx: &FieldContext, u: &[u64], v: &[u64]) -> Result<u128> {
    let u = ctx.normalize_set(u);
    let v = ctx.normalize_set(v);
    if u.is_empty() || v.is_empty() {
        return Err(Error::EmptySet);
    }
    let mut hist = vec![0u64; ctx.p() as usize];
    for &x in &u {
        for &y in &v {
            hist[ctx.mul(x, y) as usize] += 1;
        }
    }
    Ok(sum_of_squares(&hist))
}

fn sum_of_squares(hist: &[u64]) -> u128 {
    hist.iter().map(|&h| h as u128 * h as u128).sum()
}

/// `dh(delta) = #{(u, v) in U^2 : u - v = delta}`.
pub fn difference_histogram(ctx: &FieldContext, set: &[u64]) -> Vec<u64> {
    let mut hist = vec![0u64; ctx.p() as usize];
    for &u in set {
        for &v in set {
            hist[ctx.sub(u, v) as usize] += 1;
        }
    }
    hist
}

/// How [`d_times`] convolves the difference histogram.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvolutionRoute {
    /// Pick by support size.
    Auto,
    /// Every pair of nonzero differences.
    Direct,
    /// Cyclic convolution in discrete-log coordinates.
    Transform,
}

/// `D_x(U)`: solutions of `(u_1 - v_1)(u_2 - v_2) = (u_3 - v_3)(u_4 - v_4)`.
pub fn d_times(ctx: &FieldContext, set: &[u64]) -> Result<u128> {
    d_times_with(ctx, set, ConvolutionRoute::Auto)
}

/// The product histogram `h(t) = #{(u_1, v_1, u_2, v_2) : (u_1 - v_1)(u_2 - v_2) = t}`.
pub fn difference_product_histogram(ctx: &FieldContext, set: &[u64], route: ConvolutionRoute) -> Result<Vec<u64>> {
    let set = ctx.normalize_set(set);
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    if set[0] == 0 {
        return Err(Error::ZeroArgument);
    }
    if set.len() > D_TIMES_LIMIT {
        return Err(Error::TooLarge {
            what: "|U|",
            value: set.len() as u64,
            limit: D_TIMES_LIMIT as u64,
        });
    }
    let p = ctx.p();
    let dh = difference_histogram(ctx, &set);
    let pairs = (set.len() * set.len()) as u64;
    let zero = dh[0];

    let support: Vec<(u64, u64)> = dh
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, &c)| c > 0)
        .map(|(d, &c)| (d as u64, c))
        .collect();
    let s = support.len() as u64;

    let route = match route {
        ConvolutionRoute::Auto => {
            if s * s <= 64 * p {
                ConvolutionRoute::Direct
            } else {
                ConvolutionRoute::Transform
            }
        }
        r => r,
    };

    let mut hist = vec![0u64; p as usize];
    // A zero factor on either side.
    hist[0] = 2 * zero * pairs - zero * zero;
    match route {
        ConvolutionRoute::Transform => {
            let n = (p - 1) as usize;
            let mut by_index = vec![0u64; n];
            for &(d, c) in &support {
                by_index[ctx.dlog(d)? as usize] = c;
            }
            let conv = ntt::cyclic_self_convolution(&by_index).ok_or(Error::TooLarge {
                what: "transform length",
                value: 2 * n as u64,
                limit: ntt::MAX_LEN as u64,
            })?;
            let mut x = 1u64;
            for c in conv {
                hist[x as usize] = c;
                x = ctx.mul(x, ctx.primitive_root());
            }
        }
        _ => {
            for &(d1, c1) in &support {
                for &(d2, c2) in &support {
                    hist[ctx.mul(d1, d2) as usize] += c1 * c2;
                }
            }
        }
    }
    Ok(hist)
}

pub fn d_times_with(ctx: &FieldContext, set: &[u64], route: ConvolutionRoute) -> Result<u128> {
    Ok(sum_of_squares(&difference_product_histogram(ctx, set, route)?))
}

/// Outcome of comparing `T_{lambda,mu}(G, H)` with `|G||H| E(G - lambda^{-1}, H - mu^{-1})`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EnergyRelation {
    pub t: u128,
    pub product_form: u128,
    /// `product_form - t`; never negative.
    pub gap: i128,
}

/// For subgroups, the ratio `(u - lambda v)/(u - lambda w)` depends only on
/// `v/u` and `w/u`, so `T_{lambda,mu}(G, H)` equals `|G||H|` times the
/// number of solutions of `(1 - lambda v)(1 - mu w') = (1 - lambda w)(1 - mu v')`
/// with nonzero denominators. That count is the energy of
/// `(1 - lambda G, 1 - mu H)`, which dilates to `(G - lambda^{-1}, H - mu^{-1})`,
/// minus the degenerate solutions; hence the gap is nonnegative.
pub fn t_energy_relation(ctx: &FieldContext, g: &Subgroup, h: &Subgroup, lambda: u64, mu: u64) -> Result<EnergyRelation> {
    for grp in [g, h] {
        if grp.order() > RELATION_LIMIT {
            return Err(Error::TooLarge {
                what: "subgroup order",
                value: grp.order(),
                limit: RELATION_LIMIT,
            });
        }
    }
    let t = collinear_triples(ctx, g.elements(), h.elements(), lambda, mu)?;
    let lambda_inv = ctx.inv(lambda).map_err(|_| Error::ZeroScalar)?;
    let mu_inv = ctx.inv(mu).map_err(|_| Error::ZeroScalar)?;
    let shifted_g = ctx.translate_set(g.elements(), ctx.neg(lambda_inv));
    let shifted_h = ctx.translate_set(h.elements(), ctx.neg(mu_inv));
    let energy = mult_energy(ctx, &shifted_g, &shifted_h)?;
    let product_form = g.order() as u128 * h.order() as u128 * energy;
    Ok(EnergyRelation {
        t,
        product_form,
        gap: product_form as i128 - t as i128,
    })
}

/// Exact value of [`EnergyRelation::gap`].
///
/// The excluded solutions are those with `1 - lambda w = 0` or `1 - mu w' = 0`,
/// possible only when `lambda^{-1} in G` (`a`) or `mu^{-1} in H` (`b`).
/// Counting them gives `gap = |G||H| (a h^2 + a b (g - 1) h + b g (g - a))`.
pub fn relation_gap_closed_form(ctx: &FieldContext, g: &Subgroup, h: &Subgroup, lambda: u64, mu: u64) -> Result<i128> {
    let a = g.contains(ctx.inv(lambda).map_err(|_| Error::ZeroScalar)?) as i128;
    let b = h.contains(ctx.inv(mu).map_err(|_| Error::ZeroScalar)?) as i128;
    let (gn, hn) = (g.order() as i128, h.order() as i128);
    Ok(gn * hn * (a * hn * hn + a * b * (gn - 1) * hn + b * gn * (gn - a)))
}

/// `E(G + lambda)` against its main term `|G|^4 / p`.
#[derive(Debug, Clone, Serialize)]
pub struct EnergyReport {
    pub p: u64,
    pub order: u64,
    pub lambda: u64,
    pub energy: u128,
    pub main_term: f64,
    pub deviation: f64,
    pub regime: Regime,
    pub regime_bound: f64,
    pub ratio: f64,
}

pub fn energy_deviation_report(ctx: &FieldContext, g: &Subgroup, lambda: u64) -> Result<EnergyReport> {
    let lambda = ctx.reduce(lambda);
    if lambda == 0 {
        return Err(Error::ZeroScalar);
    }
    if g.order() > ENERGY_REPORT_LIMIT {
        return Err(Error::TooLarge {
            what: "subgroup order",
            value: g.order(),
            limit: ENERGY_REPORT_LIMIT,
        });
    }
    let shifted = ctx.translate_set(g.elements(), lambda);
    let energy = mult_energy(ctx, &shifted, &shifted)?;
    let p = ctx.p();
    let main_term = (g.order() as f64).powi(4) / p as f64;
    let deviation = (energy as f64 - main_term).abs();
    let (regime_bound, regime) = shifted_energy_bound(p, g.order());
    Ok(EnergyReport {
        p,
        order: g.order(),
        lambda,
        energy,
        main_term,
        deviation,
        regime,
        regime_bound,
        ratio: deviation / regime_bound,
    })
}

/// `D_x(U)` against `|U|^2 T(U) + |U|^6`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DxCheck {
    pub lhs: u128,
    pub rhs: u128,
    pub ratio: f64,
}

pub fn dx_vs_t_check(ctx: &FieldContext, set: &[u64]) -> Result<DxCheck> {
    let set = ctx.normalize_set(set);
    if set.len() > DX_CHECK_LIMIT {
        return Err(Error::TooLarge {
            what: "|U|",
            value: set.len() as u64,
            limit: DX_CHECK_LIMIT as u64,
        });
    }
    let lhs = d_times(ctx, &set)?;
    let t = collinear_triples(ctx, &set, &set, 1, 1)?;
    let n = set.len() as u128;
    let rhs = n * n * t + n.pow(6);
    Ok(DxCheck {
        lhs,
        rhs,
        ratio: lhs as f64 / rhs as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::make_field;

    fn energy_oracle(ctx: &FieldContext, u: &[u64], v: &[u64]) -> u128 {
        let mut count = 0;
        for &a in u {
            for &b in v {
                for &c in u {
                    for &d in v {
                        if ctx.mul(a, b) == ctx.mul(c, d) {
                            count += 1;
                        }
                    }
                }
            }
        }
        count
    }

    #[test]
    fn energy_examples() {
        let ctx = make_field(7).unwrap();
        assert_eq!(mult_energy(&ctx, &[1], &[1]).unwrap(), 1);
        assert_eq!(mult_energy(&ctx, &[1, 2], &[1, 2]).unwrap(), 6);
        let g = ctx.subgroup(3).unwrap();
        assert_eq!(mult_energy(&ctx, g.elements(), g.elements()).unwrap(), 27);
        assert_eq!(mult_energy(&ctx, &[], &[1]).unwrap_err(), Error::EmptySet);
    }

    #[test]
    fn energy_with_zero_elements() {
        let ctx = make_field(11).unwrap();
        let u = [0, 3, 5];
        let v = [0, 1, 7, 10];
        assert_eq!(mult_energy(&ctx, &u, &v).unwrap(), energy_oracle(&ctx, &u, &v));
    }

    #[test]
    fn d_times_examples() {
        let ctx = make_field(7).unwrap();
        assert_eq!(d_times(&ctx, &[1]).unwrap(), 1);
        assert_eq!(d_times(&ctx, &[1, 2]).unwrap(), 152);
        let h = difference_product_histogram(&ctx, &[1, 2], ConvolutionRoute::Auto).unwrap();
        assert_eq!(h, vec![12, 2, 0, 0, 0, 0, 2]);
        assert_eq!(d_times(&ctx, &[]).unwrap_err(), Error::EmptySet);
        assert_eq!(d_times(&ctx, &[0, 1]).unwrap_err(), Error::ZeroArgument);
    }

    #[test]
    fn convolution_routes_agree() {
        let ctx = make_field(1009).unwrap();
        let set: Vec<u64> = (1..60).map(|i| (i * i * 37 + 5) % 1009).filter(|&x| x != 0).collect();
        let direct = d_times_with(&ctx, &set, ConvolutionRoute::Direct).unwrap();
        let transform = d_times_with(&ctx, &set, ConvolutionRoute::Transform).unwrap();
        assert_eq!(direct, transform);
    }

    #[test]
    fn degenerate_relation() {
        let ctx = make_field(7).unwrap();
        let one = ctx.subgroup(1).unwrap();
        let rel = t_energy_relation(&ctx, &one, &one, 1, 1).unwrap();
        assert_eq!((rel.t, rel.product_form, rel.gap), (0, 1, 1));
        assert_eq!(relation_gap_closed_form(&ctx, &one, &one, 1, 1).unwrap(), 1);
    }

    #[test]
    fn relation_gap_matches_closed_form() {
        let ctx = make_field(61).unwrap();
        for (dg, dh) in [(3, 4), (5, 12), (1, 60), (20, 2)] {
            let g = ctx.subgroup(dg).unwrap();
            let h = ctx.subgroup(dh).unwrap();
            for (lambda, mu) in [(1, 1), (2, 7), (ctx.inv(g.generator()).unwrap(), 5), (9, 60), (11, 1)] {
                let rel = t_energy_relation(&ctx, &g, &h, lambda, mu).unwrap();
                assert!(rel.gap >= 0);
                assert_eq!(rel.gap, relation_gap_closed_form(&ctx, &g, &h, lambda, mu).unwrap(), "{dg} {dh} {lambda} {mu}");
            }
        }
    }

    #[test]
    fn energy_report_for_small_subgroup() {
        let ctx = make_field(13).unwrap();
        let g = ctx.subgroup(3).unwrap();
        let report = energy_deviation_report(&ctx, &g, 1).unwrap();
        let shifted = ctx.translate_set(g.elements(), 1);
        assert_eq!(report.energy, energy_oracle(&ctx, &shifted, &shifted));
        assert!(report.energy >= 9);
    }

    #[test]
    fn dx_check_singleton() {
        let ctx = make_field(7).unwrap();
        let c = dx_vs_t_check(&ctx, &[1]).unwrap();
        assert_eq!((c.lhs, c.rhs), (1, 1));
        assert_eq!(c.ratio, 1.0);
    }
}
