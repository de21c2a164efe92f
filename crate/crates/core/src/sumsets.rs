//! Three-fold sumsets, shifted ratio sets, and Romanoff-type coverage.

use serde::Serialize;

use crate::bounds::{sumset_deficiency_bound, CoverageRegime};
use crate::error::{Error, Result};
use crate::field::{FieldContext, Subgroup};

/// Work cap for the sumset and ratio-set enumerations.
pub const ENUMERATION_LIMIT: u64 = 1_000_000_000;

/// Cap on `|G|^2` for [`ratio_shift_set`].
pub const RATIO_PAIR_LIMIT: u64 = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SumsetKind {
    S1,
    S2,
}

#[derive(Debug, Clone, Serialize)]
pub struct SumsetReport {
    pub kind: SumsetKind,
    pub size: u64,
    pub missing_nonzero: u64,
    pub regime: CoverageRegime,
    /// Deficiency bound in the covering regimes, `|G|^2 / log |G|` in the floor regime.
    pub bound: f64,
    pub covered: bool,
    /// For `S2` only: whether `0` lies in `G * S2`.
    pub zero_in_q: Option<bool>,
    #[serde(skip)]
    pub members: Vec<u64>,
}

fn members_of(bitmap: &[bool]) -> Vec<u64> {
    bitmap.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i as u64).collect()
}

fn missing_nonzero(bitmap: &[bool]) -> u64 {
    bitmap.iter().skip(1).filter(|&&b| !b).count() as u64
}

fn check_scalar(ctx: &FieldContext, x: u64) -> Result<u64> {
    match ctx.reduce(x) {
        0 => Err(Error::ZeroScalar),
        x => Ok(x),
    }
}

/// Membership bitmap of `A + B` where `A` is given as a bitmap.
fn add_set(ctx: &FieldContext, a: &[bool], b: &[u64]) -> Vec<bool> {
    let p = ctx.p() as usize;
    let mut out = vec![false; p];
    for (x, _) in a.iter().enumerate().filter(|(_, &m)| m) {
        for &y in b {
            out[ctx.add(x as u64, y) as usize] = true;
        }
    }
    out
}

/// `S1 = G + lambda G + mu G`, built as `(G + lambda G) + mu G`.
pub fn three_fold_sumset(ctx: &FieldContext, g: &Subgroup, lambda: u64, mu: u64) -> Result<SumsetReport> {
    let lambda = check_scalar(ctx, lambda)?;
    let mu = check_scalar(ctx, mu)?;
    let p = ctx.p();
    let n = g.order();
    let work = n * n + p.min(n * n) * n;
    if work > ENUMERATION_LIMIT {
        return Err(Error::TooLarge {
            what: "sumset enumeration",
            value: work,
            limit: ENUMERATION_LIMIT,
        });
    }
    let mut base = vec![false; p as usize];
    for &x in g.elements() {
        base[x as usize] = true;
    }
    let two = add_set(ctx, &base, &ctx.dilate_set(g.elements(), lambda)?);
    let three = add_set(ctx, &two, &ctx.dilate_set(g.elements(), mu)?);
    let missing = missing_nonzero(&three);
    let (bound, regime) = sumset_deficiency_bound(p, n);
    let members = members_of(&three);
    Ok(SumsetReport {
        kind: SumsetKind::S1,
        size: members.len() as u64,
        missing_nonzero: missing,
        regime,
        bound,
        covered: missing == 0,
        zero_in_q: None,
        members,
    })
}

/// `S2 = {(u - lambda)/(v - mu) : u, v in G, v != mu}` and `Q = G * S2`.
///
/// `covered` reports whether `F_p^*` is contained in `Q`.
pub fn ratio_shift_set(ctx: &FieldContext, g: &Subgroup, lambda: u64, mu: u64) -> Result<SumsetReport> {
    let lambda = check_scalar(ctx, lambda)?;
    let mu = check_scalar(ctx, mu)?;
    let p = ctx.p();
    let n = g.order();
    if n * n > RATIO_PAIR_LIMIT {
        return Err(Error::TooLarge {
            what: "|G|^2",
            value: n * n,
            limit: RATIO_PAIR_LIMIT,
        });
    }
    let inv_denoms: Vec<u64> = g
        .elements()
        .iter()
        .filter(|&&v| v != mu)
        .map(|&v| ctx.inv(ctx.sub(v, mu)))
        .collect::<Result<_>>()?;
    if inv_denoms.is_empty() {
        return Err(Error::EmptyRatioSet);
    }
    let mut s2 = vec![false; p as usize];
    for &u in g.elements() {
        let num = ctx.sub(u, lambda);
        for &d in &inv_denoms {
            s2[ctx.mul(num, d) as usize] = true;
        }
    }
    // Q is a union of cosets of G (plus possibly 0); mark each coset once.
    let mut q = vec![false; p as usize];
    q[0] = s2[0];
    for x in 1..p {
        if s2[x as usize] && !q[x as usize] {
            for &h in g.elements() {
                q[ctx.mul(x, h) as usize] = true;
            }
        }
    }
    let (bound, regime) = sumset_deficiency_bound(p, n);
    let members = members_of(&s2);
    Ok(SumsetReport {
        kind: SumsetKind::S2,
        size: members.len() as u64,
        missing_nonzero: missing_nonzero(&s2),
        regime,
        bound,
        covered: missing_nonzero(&q) == 0,
        zero_in_q: Some(q[0]),
        members,
    })
}

/// Primes below `n`.
pub fn primes_below(n: u64) -> Vec<u64> {
    if n < 3 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n];
    let mut i = 2;
    while i * i < n {
        if !composite[i] {
            for j in (i * i..n).step_by(i) {
                composite[j] = true;
            }
        }
        i += 1;
    }
    (2..n).filter(|&i| !composite[i]).map(|i| i as u64).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RomanoffCoverage {
    /// Residues mod p with no representation `l + g^k + g^m + g^n`, `l < p` prime.
    pub missing: u64,
    pub order: u64,
    pub regime: CoverageRegime,
}

pub fn romanoff_coverage(ctx: &FieldContext, base: i64) -> Result<RomanoffCoverage> {
    if base.unsigned_abs() < 2 {
        return Err(Error::InvalidBase(base));
    }
    let p = ctx.p();
    if p < 5 {
        return Err(Error::ModulusTooSmall(p));
    }
    let g = ctx.reduce_signed(base);
    if g == 0 {
        return Err(Error::BaseDivisibleByP { base, p });
    }
    let order = ctx.multiplicative_order(g)?;
    let powers = ctx.subgroup(order)?;
    let sums = three_fold_sumset(ctx, &powers, 1, 1)?;
    let mut covered = vec![false; p as usize];
    for l in primes_below(p) {
        for &s in &sums.members {
            covered[ctx.add(l, s) as usize] = true;
        }
    }
    let missing = covered.iter().filter(|&&c| !c).count() as u64;
    let (_, regime) = sumset_deficiency_bound(p, order);
    Ok(RomanoffCoverage { missing, order, regime })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::make_field;

    #[test]
    fn sumset_examples() {
        let ctx = make_field(7).unwrap();
        let g = ctx.subgroup(3).unwrap();
        let r = three_fold_sumset(&ctx, &g, 1, 1).unwrap();
        assert_eq!(r.size, 7);
        assert!(r.covered);
        let full = ctx.subgroup(6).unwrap();
        assert!(three_fold_sumset(&ctx, &full, 1, 1).unwrap().covered);
        assert_eq!(three_fold_sumset(&ctx, &g, 0, 1).unwrap_err(), Error::ZeroScalar);
    }

    #[test]
    fn sumset_matches_triple_loop() {
        let ctx = make_field(61).unwrap();
        let g = ctx.subgroup(5).unwrap();
        let (l, m) = (7, 19);
        let mut expected: Vec<u64> = Vec::new();
        for &a in g.elements() {
            for &b in g.elements() {
                for &c in g.elements() {
                    expected.push(ctx.add(a, ctx.add(ctx.mul(l, b), ctx.mul(m, c))));
                }
            }
        }
        expected.sort_unstable();
        expected.dedup();
        assert_eq!(three_fold_sumset(&ctx, &g, l, m).unwrap().members, expected);
    }

    #[test]
    fn ratio_examples() {
        let ctx = make_field(7).unwrap();
        let one = ctx.subgroup(1).unwrap();
        let r = ratio_shift_set(&ctx, &one, 2, 3).unwrap();
        // (1 - 2)/(1 - 3) = 1/2 = 4 in F_7.
        assert_eq!(r.members, vec![4]);
        assert_eq!(ratio_shift_set(&ctx, &one, 2, 1).unwrap_err(), Error::EmptyRatioSet);
        let g = ctx.subgroup(3).unwrap();
        assert_eq!(ratio_shift_set(&ctx, &g, 2, 3).unwrap().zero_in_q, Some(true));
        assert_eq!(ratio_shift_set(&ctx, &g, 3, 3).unwrap().zero_in_q, Some(false));
    }

    #[test]
    fn sieve() {
        assert_eq!(primes_below(11), vec![2, 3, 5, 7]);
        assert_eq!(primes_below(2), Vec::<u64>::new());
        assert_eq!(primes_below(3), vec![2]);
    }

    fn romanoff_oracle(ctx: &FieldContext, g: u64) -> u64 {
        let p = ctx.p();
        let powers: Vec<u64> = (1..p).map(|k| ctx.pow(g, k)).collect();
        let mut covered = vec![false; p as usize];
        for l in primes_below(p) {
            for &a in &powers {
                for &b in &powers {
                    for &c in &powers {
                        covered[ctx.add(l, ctx.add(a, ctx.add(b, c))) as usize] = true;
                    }
                }
            }
        }
        covered.iter().filter(|&&c| !c).count() as u64
    }

    #[test]
    fn romanoff_examples() {
        let ctx = make_field(11).unwrap();
        let r = romanoff_coverage(&ctx, 2).unwrap();
        assert_eq!((r.missing, r.order), (0, 10));
        let ctx = make_field(7).unwrap();
        let r = romanoff_coverage(&ctx, 6).unwrap();
        assert_eq!(r.order, 2);
        assert_eq!(r.missing, romanoff_oracle(&ctx, 6));
        assert_eq!(romanoff_coverage(&ctx, -8).unwrap().missing, romanoff_oracle(&ctx, 6));
        assert_eq!(romanoff_coverage(&ctx, 14).unwrap_err(), Error::BaseDivisibleByP { base: 14, p: 7 });
        assert_eq!(romanoff_coverage(&ctx, 1).unwrap_err(), Error::InvalidBase(1));
    }
}
