//! Seeded measurement suites for the unspecified implied constants.
//!
//! Each suite is a pure function of its seed. The committed fixture records
//! the values they produce; later runs compare against it to catch drift.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::{clamped_log, CoverageRegime};
use crate::energy::{dx_vs_t_check, t_energy_relation};
use crate::error::Result;
use crate::field::{divisors, FieldContext};
use crate::incidence::{collinear_triples, iota_cube_sum};
use crate::sumsets::{primes_below, ratio_shift_set, three_fold_sumset};
use crate::sweep::{run_sweep, LambdaSampling, Measure, OrderSelection, SweepError, SweepSpec, SCHEMA_VERSION};

pub const FIXTURE_VERSION: u32 = 1;
pub const DEFAULT_SEED: u64 = 20_240_611;

/// Moduli of the deviation-ratio suite.
pub const RATIO_PRIMES: [u64; 3] = [1009, 2003, 10007];

/// `k` distinct uniform elements of `[lo, p)`.
pub fn random_subset<R: Rng>(rng: &mut R, p: u64, lo: u64, k: usize) -> Vec<u64> {
    let span = (p - lo) as usize;
    let mut v: Vec<u64> = sample(rng, span, k.min(span)).into_iter().map(|i| i as u64 + lo).collect();
    v.sort_unstable();
    v
}

fn primes_between(lo: u64, hi: u64) -> Vec<u64> {
    primes_below(hi + 1).into_iter().filter(|&p| p >= lo).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrimeRatio {
    pub p: u64,
    pub max_ratio: f64,
}

/// Maximum of `|T_lambda(G) - |G|^6/p| / bound` per modulus, over every
/// subgroup of order at most 1000 and three sampled lambdas.
pub fn triple_ratio_suite(seed: u64, jobs: usize) -> std::result::Result<Vec<PrimeRatio>, SweepError> {
    let spec = SweepSpec {
        schema_version: SCHEMA_VERSION,
        primes: Some(RATIO_PRIMES.to_vec()),
        prime_range: None,
        subgroup_orders: OrderSelection::default(),
        max_order: 1000,
        lambda: LambdaSampling { count: 3, seed },
        measures: vec![Measure::Triples],
        columns: None,
        jobs,
    };
    let rows = run_sweep(&spec, false)?.rows;
    Ok(RATIO_PRIMES
        .iter()
        .map(|&p| PrimeRatio {
            p,
            max_ratio: rows.iter().filter(|r| r.p == p).map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max),
        })
        .collect())
}

/// One instance of the subgroup-pair relation suite.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelationSample {
    pub p: u64,
    pub g: u64,
    pub h: u64,
    pub lambda: u64,
    pub mu: u64,
    pub gap: i128,
    /// `gap / (|G|^3 |H|)`.
    pub scaled: f64,
}

/// Random subgroup pairs with orders at most 60 in moduli up to 499.
pub fn relation_suite(seed: u64, count: usize) -> Result<Vec<RelationSample>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let primes = primes_between(61, 499);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let p = primes[rng.gen_range(0..primes.len())];
        let orders: Vec<u64> = divisors(p - 1).into_iter().filter(|&d| d <= 60).collect();
        let ctx = FieldContext::new(p)?;
        let g = ctx.subgroup(orders[rng.gen_range(0..orders.len())])?;
        let h = ctx.subgroup(orders[rng.gen_range(0..orders.len())])?;
        let (lambda, mu) = (rng.gen_range(1..p), rng.gen_range(1..p));
        let rel = t_energy_relation(&ctx, &g, &h, lambda, mu)?;
        out.push(RelationSample {
            p,
            g: g.order(),
            h: h.order(),
            lambda,
            mu,
            gap: rel.gap,
            scaled: rel.gap as f64 / (g.order().pow(3) * h.order()) as f64,
        });
    }
    Ok(out)
}

/// Max of `|sum iota iota_scaled^2 - T_{lambda,mu}(A, B)| / (|A|^2 |B|^2)`
/// over random sets of size 1 to 12 in moduli 5 to 101.
pub fn cube_sum_suite(seed: u64, count: usize) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let primes = primes_between(5, 101);
    let mut worst = 0f64;
    for _ in 0..count {
        let p = primes[rng.gen_range(0..primes.len())];
        let ctx = FieldContext::new(p)?;
        let (na, nb) = (rng.gen_range(1..=12), rng.gen_range(1..=12));
        let a = random_subset(&mut rng, p, 1, na);
        let b = random_subset(&mut rng, p, 1, nb);
        let (lambda, mu) = (rng.gen_range(1..p), rng.gen_range(1..p));
        let cube = iota_cube_sum(&ctx, &a, &b, lambda, mu)? as f64;
        let t = collinear_triples(&ctx, &a, &b, lambda, mu)? as f64;
        let scale = (a.len() * a.len() * b.len() * b.len()) as f64;
        worst = worst.max((cube - t).abs() / scale);
    }
    Ok(worst)
}

/// Max of `D_x(U) / (|U|^2 T(U) + |U|^6)` over random `U` with `|U| <= 100`.
pub fn dx_suite(seed: u64, count: usize) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let primes = primes_between(101, 1009);
    let mut worst = 0f64;
    for _ in 0..count {
        let p = primes[rng.gen_range(0..primes.len())];
        let ctx = FieldContext::new(p)?;
        let n = rng.gen_range(1..=100);
        let u = random_subset(&mut rng, p, 1, n);
        worst = worst.max(dx_vs_t_check(&ctx, &u)?.ratio);
    }
    Ok(worst)
}

/// Minimum of `|S_i| / (|G|^2 / log |G|)` over floor-regime subgroups of
/// every modulus up to 499, five `(lambda, mu)` each. Returns `(S1, S2)`.
pub fn sumset_floor_suite(seed: u64) -> Result<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut c1, mut c2) = (f64::INFINITY, f64::INFINITY);
    for p in primes_between(5, 499) {
        let ctx = FieldContext::new(p)?;
        for d in divisors(p - 1) {
            let g = ctx.subgroup(d)?;
            for _ in 0..5 {
                let (lambda, mu) = (rng.gen_range(1..p), rng.gen_range(1..p));
                let s1 = three_fold_sumset(&ctx, &g, lambda, mu)?;
                if s1.regime != CoverageRegime::Floor {
                    break;
                }
                let floor = (d * d) as f64 / clamped_log(d as f64);
                c1 = c1.min(s1.size as f64 / floor);
                if let Ok(s2) = ratio_shift_set(&ctx, &g, lambda, mu) {
                    c2 = c2.min(s2.size as f64 / floor);
                }
            }
        }
    }
    Ok((c1, c2))
}

/// Instance counts of the randomized suites.
pub const RELATION_COUNT: usize = 100;
pub const CUBE_SUM_COUNT: usize = 200;
pub const DX_COUNT: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub version: u32,
    pub seed: u64,
    pub triple_ratio: Vec<PrimeRatio>,
    /// Max of `gap / (|G|^3 |H|)`.
    pub relation_constant: f64,
    /// Max of `|cube sum - T| / (|A|^2 |B|^2)`.
    pub cube_sum_constant: f64,
    /// Max of `D_x(U) / (|U|^2 T(U) + |U|^6)`.
    pub dx_constant: f64,
    /// Min of `|S1| log|G| / |G|^2` in the floor regime.
    pub sumset_floor_s1: f64,
    /// Min of `|S2| log|G| / |G|^2` in the floor regime.
    pub sumset_floor_s2: f64,
}

impl Calibration {
    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("calibration serializes")
    }
}

pub fn calibrate(seed: u64, jobs: usize) -> std::result::Result<Calibration, SweepError> {
    let relation = relation_suite(seed, RELATION_COUNT)?;
    let (s1, s2) = sumset_floor_suite(seed)?;
    Ok(Calibration {
        version: FIXTURE_VERSION,
        seed,
        triple_ratio: triple_ratio_suite(seed, jobs)?,
        relation_constant: relation.iter().map(|r| r.scaled).fold(0.0, f64::max),
        cube_sum_constant: cube_sum_suite(seed, CUBE_SUM_COUNT)?,
        dx_constant: dx_suite(seed, DX_COUNT)?,
        sumset_floor_s1: s1,
        sumset_floor_s2: s2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subsets_are_distinct_and_in_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = random_subset(&mut rng, 11, 1, 20);
        assert_eq!(s, (1..11).collect::<Vec<_>>());
        let s = random_subset(&mut rng, 101, 1, 7);
        assert_eq!(s.len(), 7);
        assert!(s.windows(2).all(|w| w[0] < w[1]) && s[0] >= 1);
    }

    #[test]
    fn suites_are_deterministic() {
        assert_eq!(relation_suite(5, 10).unwrap(), relation_suite(5, 10).unwrap());
        assert_eq!(dx_suite(5, 3).unwrap(), dx_suite(5, 3).unwrap());
        assert!(relation_suite(5, 10).unwrap().iter().all(|r| r.gap >= 0));
    }
}
