//! Prime-field arithmetic, primitive roots, discrete logarithms and the
//! multiplicative subgroups every other module is built on.
//!
//! Residues are plain `u64` values in `[0, p)`. Since `p < 2^31`, the product
//! of two residues fits in a `u64` and no wide intermediate is needed.

use std::collections::HashMap;
use std::fmt;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Exclusive upper bound on supported moduli.
pub const MODULUS_LIMIT: u64 = 1 << 31;

/// Moduli up to this size get a dense discrete-log table at construction.
pub const EAGER_TABLE_LIMIT: u64 = 10_000_000;

/// An odd prime `p < 2^31` together with its smallest primitive root.
///
/// Immutable after construction; the lazily built caches are behind
/// [`OnceLock`] so a context can be shared freely across threads.
pub struct FieldContext {
    p: u64,
    primitive_root: u64,
    /// Distinct prime factors of `p - 1`, ascending.
    order_factors: Vec<u64>,
    dlog_table: Option<Vec<u32>>,
    baby_steps: OnceLock<BabySteps>,
    additive_roots: OnceLock<Vec<Complex64>>,
    order_roots: OnceLock<Vec<Complex64>>,
}

struct BabySteps {
    stride: u64,
    table: HashMap<u32, u32>,
    /// `g^{-stride}`.
    giant: u64,
}

impl fmt::Debug for FieldContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldContext")
            .field("p", &self.p)
            .field("primitive_root", &self.primitive_root)
            .field("dlog_table", &self.dlog_table.is_some())
            .finish()
    }
}

/// Builds a validated [`FieldContext`] for `p`.
pub fn make_field(p: u64) -> Result<FieldContext> {
    FieldContext::new(p)
}

/// Distinct prime factors of `n` by trial division, ascending.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut q = 2;
    while q * q <= n {
        if n % q == 0 {
            out.push(q);
            while n % q == 0 {
                n /= q;
            }
        }
        q += if q == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// All positive divisors of `n`, ascending.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut q = 3;
    while q * q <= n {
        if n % q == 0 {
            return false;
        }
        q += 2;
    }
    true
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl FieldContext {
    pub fn new(p: u64) -> Result<Self> {
        if p < 2 {
            return Err(Error::ModulusTooSmall(p));
        }
        if p == 2 {
            return Err(Error::EvenModulus);
        }
        if p >= MODULUS_LIMIT {
            return Err(Error::TooLarge {
                what: "modulus",
                value: p,
                limit: MODULUS_LIMIT - 1,
            });
        }
        if !is_prime(p) {
            return Err(Error::CompositeModulus(p));
        }
        let order_factors = prime_factors(p - 1);
        let primitive_root = (2..p)
            .find(|&g| order_factors.iter().all(|&q| pow_mod(g, (p - 1) / q, p) != 1))
            .expect("every prime field has a primitive root");

        let mut ctx = FieldContext {
            p,
            primitive_root,
            order_factors,
            dlog_table: None,
            baby_steps: OnceLock::new(),
            additive_roots: OnceLock::new(),
            order_roots: OnceLock::new(),
        };
        if p <= EAGER_TABLE_LIMIT {
            let mut table = vec![0u32; p as usize];
            let mut x = 1u64;
            for i in 0..p - 1 {
                table[x as usize] = i as u32;
                x = x * primitive_root % p;
            }
            ctx.dlog_table = Some(table);
        }
        Ok(ctx)
    }

    #[inline]
    pub fn p(&self) -> u64 {
        self.p
    }

    #[inline]
    pub fn primitive_root(&self) -> u64 {
        self.primitive_root
    }

    pub fn has_dlog_table(&self) -> bool {
        self.dlog_table.is_some()
    }

    /// Distinct prime factors of `p - 1`.
    pub fn order_factors(&self) -> &[u64] {
        &self.order_factors
    }

    #[inline]
    pub fn reduce(&self, x: u64) -> u64 {
        x % self.p
    }

    /// Reduces a signed integer into `[0, p)`.
    #[inline]
    pub fn reduce_signed(&self, x: i64) -> u64 {
        x.rem_euclid(self.p as i64) as u64
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        a * b % self.p
    }

    pub fn pow(&self, base: u64, exp: u64) -> u64 {
        pow_mod(base, exp, self.p)
    }

    /// Multiplicative inverse via the extended Euclidean algorithm.
    pub fn inv(&self, a: u64) -> Result<u64> {
        let a = a % self.p;
        if a == 0 {
            return Err(Error::ZeroArgument);
        }
        let (mut r0, mut r1) = (self.p as i64, a as i64);
        let (mut t0, mut t1) = (0i64, 1i64);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        Ok(self.reduce_signed(t0))
    }

    /// Index of `x` with respect to the primitive root, in `[0, p - 2]`.
    pub fn dlog(&self, x: u64) -> Result<u64> {
        let x = x % self.p;
        if x == 0 {
            return Err(Error::ZeroArgument);
        }
        if let Some(table) = &self.dlog_table {
            return Ok(table[x as usize] as u64);
        }
        Ok(self.dlog_bsgs(x))
    }

    /// Baby-step giant-step, independent of the dense table.
    pub(crate) fn dlog_bsgs(&self, x: u64) -> u64 {
        let steps = self.baby_steps.get_or_init(|| {
            let n = self.p - 1;
            let stride = (n as f64).sqrt().ceil() as u64;
            let mut table = HashMap::with_capacity(stride as usize);
            let mut e = 1u64;
            for j in 0..stride {
                table.entry(e as u32).or_insert(j as u32);
                e = self.mul(e, self.primitive_root);
            }
            let giant = self
                .inv(self.pow(self.primitive_root, stride))
                .expect("primitive root power is nonzero");
            BabySteps {
                stride,
                table,
                giant,
            }
        });
        let mut gamma = x;
        let mut i = 0u64;
        loop {
            if let Some(&j) = steps.table.get(&(gamma as u32)) {
                return (i * steps.stride + j as u64) % (self.p - 1);
            }
            gamma = self.mul(gamma, steps.giant);
            i += 1;
            debug_assert!(i <= steps.stride + 1, "x lies outside the cyclic group");
        }
    }

    /// The unique subgroup of `F_p^*` of order `d`.
    pub fn subgroup(&self, d: u64) -> Result<Subgroup> {
        let n = self.p - 1;
        if d == 0 || n % d != 0 {
            return Err(Error::NotADivisor { d, p_minus_one: n });
        }
        let generator = self.pow(self.primitive_root, n / d);
        let mut elements = Vec::with_capacity(d as usize);
        let mut x = 1u64;
        for _ in 0..d {
            elements.push(x);
            x = self.mul(x, generator);
        }
        elements.sort_unstable();
        Ok(Subgroup {
            modulus: self.p,
            order: d,
            generator,
            elements,
        })
    }

    /// Subgroups of every order `d | p - 1` with `d <= max_order`, ascending.
    pub fn subgroups_up_to(&self, max_order: u64) -> Vec<Subgroup> {
        divisors(self.p - 1)
            .into_iter()
            .take_while(|&d| d <= max_order)
            .map(|d| self.subgroup(d).expect("divisor of p - 1"))
            .collect()
    }

    /// Smallest `t >= 1` with `g^t = 1`, found by stripping prime factors
    /// off `p - 1`.
    pub fn multiplicative_order(&self, g: u64) -> Result<u64> {
        let g = g % self.p;
        if g == 0 {
            return Err(Error::ZeroArgument);
        }
        let mut t = self.p - 1;
        for &q in &self.order_factors {
            while t % q == 0 && self.pow(g, t / q) == 1 {
                t /= q;
            }
        }
        Ok(t)
    }

    /// `{u + shift : u in set}`, sorted.
    pub fn translate_set(&self, set: &[u64], shift: u64) -> Vec<u64> {
        let shift = shift % self.p;
        let mut out: Vec<u64> = set.iter().map(|&u| self.add(u % self.p, shift)).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// `{scale * u : u in set}`, sorted.
    pub fn dilate_set(&self, set: &[u64], scale: u64) -> Result<Vec<u64>> {
        let scale = scale % self.p;
        if scale == 0 {
            return Err(Error::ZeroDilation);
        }
        let mut out: Vec<u64> = set.iter().map(|&u| self.mul(u % self.p, scale)).collect();
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }

    /// Reduces, sorts and deduplicates an arbitrary list of integers.
    pub fn normalize_set(&self, set: &[u64]) -> Vec<u64> {
        let mut out: Vec<u64> = set.iter().map(|&u| u % self.p).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// `e_p(u)` for `u` in `[0, p)`, cached for moduli up to
    /// [`EAGER_TABLE_LIMIT`].
    #[inline]
    pub(crate) fn additive_root(&self, u: u64) -> Complex64 {
        if self.p <= EAGER_TABLE_LIMIT {
            let table = self
                .additive_roots
                .get_or_init(|| unity_table(self.p));
            table[u as usize]
        } else {
            unit_root(u, self.p)
        }
    }

    /// `exp(2 pi i k / (p - 1))` for `k` in `[0, p - 1)`.
    #[inline]
    pub(crate) fn order_root(&self, k: u64) -> Complex64 {
        if self.p <= EAGER_TABLE_LIMIT {
            let table = self
                .order_roots
                .get_or_init(|| unity_table(self.p - 1));
            table[k as usize]
        } else {
            unit_root(k, self.p - 1)
        }
    }
}

#[inline]
pub fn pow_mod(base: u64, mut exp: u64, m: u64) -> u64 {
    let mut result = 1 % m;
    let mut b = base % m;
    while exp > 0 {
        if exp & 1 == 1 {
            result = result * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    result
}

fn unit_root(k: u64, n: u64) -> Complex64 {
    if k == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let theta = std::f64::consts::TAU * (k as f64 / n as f64);
    let (s, c) = theta.sin_cos();
    Complex64::new(c, s)
}

fn unity_table(n: u64) -> Vec<Complex64> {
    (0..n).map(|k| unit_root(k, n)).collect()
}

/// The multiplicative subgroup of order `d | p - 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subgroup {
    modulus: u64,
    order: u64,
    generator: u64,
    elements: Vec<u64>,
}

impl Subgroup {
    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn generator(&self) -> u64 {
        self.generator
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Elements in ascending order.
    pub fn elements(&self) -> &[u64] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, x: u64) -> bool {
        self.elements.binary_search(&(x % self.modulus)).is_ok()
    }
}
