//! Additive and multiplicative characters, sparse-polynomial exponential
//! sums, the subgroup-averaged evaluation of trinomial sums, and weighted
//! trilinear sums over subgroups.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{gcd, FieldContext, Subgroup};
use crate::kahan::CompensatedSum;

const CHUNK: u64 = 1 << 15;

/// Cap on `|F| |G| |H|` for the direct trilinear loop.
pub const TRILINEAR_LIMIT: u64 = 1_000_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Term {
    pub coeff: u64,
    pub exponent: u64,
}

/// `Psi(X) = sum a_i X^{k_i}` with nonzero coefficients and distinct
/// positive exponents. Coefficients are stored reduced mod p; exponents are
/// kept as given and reduced mod `p - 1` only at evaluation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SparsePoly {
    modulus: u64,
    terms: Vec<Term>,
}

impl SparsePoly {
    pub fn new(ctx: &FieldContext, terms: &[(u64, u64)]) -> Result<Self> {
        let signed: Vec<(i64, u64)> = terms
            .iter()
            .map(|&(a, k)| ((a % ctx.p()) as i64, k))
            .collect();
        Self::from_signed(ctx, &signed)
    }

    pub fn from_signed(ctx: &FieldContext, terms: &[(i64, u64)]) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidPolynomial("no terms".into()));
        }
        let mut out = Vec::with_capacity(terms.len());
        for &(a, k) in terms {
            let coeff = ctx.reduce_signed(a);
            if coeff == 0 {
                return Err(Error::ZeroCoefficient);
            }
            if k == 0 {
                return Err(Error::InvalidPolynomial("exponents must be positive".into()));
            }
            if out.iter().any(|t: &Term| t.exponent == k) {
                return Err(Error::InvalidPolynomial(format!("repeated exponent {k}")));
            }
            out.push(Term { coeff, exponent: k });
        }
        Ok(SparsePoly {
            modulus: ctx.p(),
            terms: out,
        })
    }

    /// `a X^k + b X^l + c X^m`.
    pub fn trinomial(ctx: &FieldContext, (a, k): (u64, u64), (b, l): (u64, u64), (c, m): (u64, u64)) -> Result<Self> {
        Self::new(ctx, &[(a, k), (b, l), (c, m)])
    }

    /// Parses `"a,k;b,l;c,m"` (any number of `;`-separated terms).
    pub fn parse(ctx: &FieldContext, spec: &str) -> Result<Self> {
        let raw: RawPoly = spec.parse()?;
        Self::from_signed(ctx, &raw.0)
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn max_exponent(&self) -> u64 {
        self.terms.iter().map(|t| t.exponent).max().unwrap_or(0)
    }

    /// Exponents reduced mod `p - 1`.
    pub fn reduced_exponents(&self) -> Vec<u64> {
        self.terms
            .iter()
            .map(|t| t.exponent % (self.modulus - 1))
            .collect()
    }

    /// True when every reduced exponent is zero, i.e. `Psi` is constant on
    /// `F_p^*`.
    pub fn is_constant_on_units(&self) -> bool {
        self.reduced_exponents().iter().all(|&k| k == 0)
    }

    /// `Psi(x) mod p` by direct exponentiation.
    pub fn eval(&self, ctx: &FieldContext, x: u64) -> u64 {
        self.terms.iter().fold(0, |acc, t| {
            ctx.add(acc, ctx.mul(t.coeff, ctx.pow(x, t.exponent)))
        })
    }
}

impl fmt::Display for SparsePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|t| format!("{},{}", t.coeff, t.exponent))
            .collect();
        f.write_str(&parts.join(";"))
    }
}

/// Unreduced polynomial spec as typed on the command line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawPoly(pub Vec<(i64, u64)>);

impl FromStr for RawPoly {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut terms = Vec::new();
        for part in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (a, k) = part
                .split_once(',')
                .ok_or_else(|| Error::InvalidPolynomial(format!("term {part:?} is not \"coeff,exponent\"")))?;
            let a: i64 = a
                .trim()
                .parse()
                .map_err(|e| Error::InvalidPolynomial(format!("coefficient {a:?}: {e}")))?;
            let k: u64 = k
                .trim()
                .parse()
                .map_err(|e| Error::InvalidPolynomial(format!("exponent {k:?}: {e}")))?;
            if k > i64::MAX as u64 {
                return Err(Error::InvalidPolynomial(format!("exponent {k} exceeds 2^63 - 1")));
            }
            terms.push((a, k));
        }
        if terms.is_empty() {
            return Err(Error::InvalidPolynomial("no terms".into()));
        }
        Ok(RawPoly(terms))
    }
}

/// Multiplicative character `chi_j(x) = e(j dlog(x) / (p - 1))`; `j = 0` is
/// the principal character.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct CharacterId(u64);

impl CharacterId {
    pub const PRINCIPAL: CharacterId = CharacterId(0);

    pub fn new(ctx: &FieldContext, j: u64) -> Result<Self> {
        if j >= ctx.p() - 1 {
            return Err(Error::InvalidCharacter { j, p: ctx.p() });
        }
        Ok(CharacterId(j))
    }

    /// The Legendre symbol, `j = (p - 1) / 2`.
    pub fn quadratic(ctx: &FieldContext) -> Self {
        CharacterId((ctx.p() - 1) / 2)
    }

    pub fn index(self) -> u64 {
        self.0
    }

    pub fn is_principal(self) -> bool {
        self.0 == 0
    }
}

/// `e_p(u) = exp(2 pi i u / p)`; `u` is taken mod p.
pub fn additive_char(ctx: &FieldContext, u: u64) -> Complex64 {
    ctx.additive_root(u % ctx.p())
}

pub fn mult_char(ctx: &FieldContext, j: CharacterId, x: u64) -> Result<Complex64> {
    let k = ctx.dlog(x)?;
    let n = ctx.p() - 1;
    Ok(ctx.order_root(mul_mod_wide(j.0, k, n)))
}

#[inline]
fn mul_mod_wide(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

/// `S_chi(Psi) = sum_{x in F_p^*} chi(x) e_p(Psi(x))`.
///
/// Walks `x = g^i` so that every monomial advances by one multiplication per
/// step. The index range is split into fixed chunks whose compensated
/// partial sums are merged in chunk order, so the result does not depend on
/// how many worker threads ran.
pub fn eval_sparse_sum(ctx: &FieldContext, poly: &SparsePoly, j: CharacterId) -> Complex64 {
    let p = ctx.p();
    let n = p - 1;
    let g = ctx.primitive_root();
    let reduced: Vec<(u64, u64)> = poly
        .terms()
        .iter()
        .map(|t| (t.coeff, t.exponent % n))
        .collect();
    let steps: Vec<u64> = reduced.iter().map(|&(_, k)| ctx.pow(g, k)).collect();
    let jj = j.index();

    let chunks: Vec<u64> = (0..n).step_by(CHUNK as usize).collect();
    let partials: Vec<CompensatedSum> = chunks
        .par_iter()
        .map(|&start| {
            let end = (start + CHUNK).min(n);
            let mut mono: Vec<u64> = reduced
                .iter()
                .map(|&(a, k)| ctx.mul(a, ctx.pow(g, mul_mod_wide(start, k, n))))
                .collect();
            let mut cidx = mul_mod_wide(start, jj, n);
            let mut acc = CompensatedSum::new();
            for _ in start..end {
                let value = mono.iter().fold(0, |s, &y| ctx.add(s, y));
                acc.add(ctx.order_root(cidx) * ctx.additive_root(value));
                for (y, &st) in mono.iter_mut().zip(&steps) {
                    *y = ctx.mul(*y, st);
                }
                cidx += jj;
                if cidx >= n {
                    cidx -= n;
                }
            }
            acc
        })
        .collect();

    let mut total = CompensatedSum::new();
    for part in &partials {
        total.merge(part);
    }
    total.value()
}

/// Evaluates a trinomial sum through the subgroup average
/// `S = (1/de) sum_x sum_{y in G_d} sum_{z in G_e} chi(xyz) e_p(Psi(xyz))`
/// with `d = gcd(k, p-1)`, `e = gcd(l, p-1)`.
///
/// Since `y^k = 1` and `z^l = 1`, the summand factors as
/// `chi(x) [chi(y) e_p(b x^l y^l)] [chi(z) e_p(a x^k z^k)] e_p(c x^m y^m z^m)`.
/// The `y` and `z` weights are pooled by the value of `y^m` and `z^m` before
/// the bilinear inner sum, which is what keeps the triple sum tractable.
pub fn eval_sum_subgroup_decomposed(ctx: &FieldContext, poly: &SparsePoly, j: CharacterId) -> Result<Complex64> {
    if poly.len() != 3 {
        return Err(Error::NotATrinomial(poly.len()));
    }
    let p = ctx.p();
    let n = p - 1;
    let t = poly.terms();
    let (a, k) = (t[0].coeff, t[0].exponent % n);
    let (b, l) = (t[1].coeff, t[1].exponent % n);
    let (c, m) = (t[2].coeff, t[2].exponent % n);
    let d = gcd(k, n);
    let e = gcd(l, n);
    let gd = ctx.subgroup(d)?;
    let ge = ctx.subgroup(e)?;
    let jj = j.index();

    let chi = |y: u64| mul_mod_wide(jj, ctx.dlog(y).expect("subgroup element"), n);

    // Pools: for each y in G_d, (chi index, y^l, slot of y^m among distinct values).
    let pool = |grp: &Subgroup, own: u64| -> (Vec<u64>, Vec<(u64, u64, usize)>) {
        let mut images: Vec<u64> = grp.elements().iter().map(|&y| ctx.pow(y, m)).collect();
        images.sort_unstable();
        images.dedup();
        let entries = grp
            .elements()
            .iter()
            .map(|&y| {
                let slot = images.binary_search(&ctx.pow(y, m)).expect("image present");
                (chi(y), ctx.pow(y, own), slot)
            })
            .collect();
        (images, entries)
    };
    let (y_images, y_entries) = pool(&gd, l);
    let (z_images, z_entries) = pool(&ge, k);

    let g = ctx.primitive_root();
    let (step_k, step_l, step_m) = (ctx.pow(g, k), ctx.pow(g, l), ctx.pow(g, m));

    let chunks: Vec<u64> = (0..n).step_by(CHUNK as usize).collect();
    let partials: Vec<CompensatedSum> = chunks
        .par_iter()
        .map(|&start| {
            let end = (start + CHUNK).min(n);
            let mut xk = ctx.mul(a, ctx.pow(g, mul_mod_wide(start, k, n)));
            let mut xl = ctx.mul(b, ctx.pow(g, mul_mod_wide(start, l, n)));
            let mut xm = ctx.mul(c, ctx.pow(g, mul_mod_wide(start, m, n)));
            let mut cidx = mul_mod_wide(start, jj, n);
            let mut ys = vec![Complex64::new(0.0, 0.0); y_images.len()];
            let mut zs = vec![Complex64::new(0.0, 0.0); z_images.len()];
            let mut acc = CompensatedSum::new();
            for _ in start..end {
                ys.iter_mut().for_each(|w| *w = Complex64::new(0.0, 0.0));
                zs.iter_mut().for_each(|w| *w = Complex64::new(0.0, 0.0));
                for &(cy, yl, slot) in &y_entries {
                    ys[slot] += ctx.order_root(cy) * ctx.additive_root(ctx.mul(xl, yl));
                }
                for &(cz, zk, slot) in &z_entries {
                    zs[slot] += ctx.order_root(cz) * ctx.additive_root(ctx.mul(xk, zk));
                }
                let mut inner = Complex64::new(0.0, 0.0);
                for (&ys_w, &s) in ys.iter().zip(&y_images) {
                    let cs = ctx.mul(xm, s);
                    let mut row = Complex64::new(0.0, 0.0);
                    for (&zs_w, &tz) in zs.iter().zip(&z_images) {
                        row += zs_w * ctx.additive_root(ctx.mul(cs, tz));
                    }
                    inner += ys_w * row;
                }
                acc.add(ctx.order_root(cidx) * inner);

                xk = ctx.mul(xk, step_k);
                xl = ctx.mul(xl, step_l);
                xm = ctx.mul(xm, step_m);
                cidx += jj;
                if cidx >= n {
                    cidx -= n;
                }
            }
            acc
        })
        .collect();

    let mut total = CompensatedSum::new();
    for part in &partials {
        total.merge(part);
    }
    Ok(total.value() / (d * e) as f64)
}

/// Dense weights for the trilinear sum: `rho` over `F x G`, `sigma` over
/// `F x H`, `tau` over `G x H`, all row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightTable {
    dims: (usize, usize, usize),
    rho: Vec<Complex64>,
    sigma: Vec<Complex64>,
    tau: Vec<Complex64>,
}

impl WeightTable {
    pub fn new(
        dims: (usize, usize, usize),
        rho: Vec<Complex64>,
        sigma: Vec<Complex64>,
        tau: Vec<Complex64>,
    ) -> Result<Self> {
        let (f, g, h) = dims;
        if rho.len() != f * g || sigma.len() != f * h || tau.len() != g * h {
            return Err(Error::WeightShape);
        }
        let bounded = |v: &[Complex64]| v.iter().all(|z| z.norm() <= 1.0 + 1e-12);
        if !(bounded(&rho) && bounded(&sigma) && bounded(&tau)) {
            return Err(Error::WeightOutOfRange);
        }
        Ok(WeightTable { dims, rho, sigma, tau })
    }

    pub fn filled(dims: (usize, usize, usize), value: Complex64) -> Result<Self> {
        let (f, g, h) = dims;
        Self::new(dims, vec![value; f * g], vec![value; f * h], vec![value; g * h])
    }

    pub fn ones(dims: (usize, usize, usize)) -> Self {
        Self::filled(dims, Complex64::new(1.0, 0.0)).expect("unit weights")
    }

    pub fn zeros(dims: (usize, usize, usize)) -> Self {
        Self::filled(dims, Complex64::new(0.0, 0.0)).expect("zero weights")
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.dims
    }

    #[inline]
    pub fn rho(&self, u: usize, v: usize) -> Complex64 {
        self.rho[u * self.dims.1 + v]
    }

    #[inline]
    pub fn sigma(&self, u: usize, w: usize) -> Complex64 {
        self.sigma[u * self.dims.2 + w]
    }

    #[inline]
    pub fn tau(&self, v: usize, w: usize) -> Complex64 {
        self.tau[v * self.dims.2 + w]
    }
}

/// `T = sum_{u in F} sum_{v in G} sum_{w in H} rho_{u,v} sigma_{u,w} tau_{v,w} e_p(a u v w)`.
pub fn eval_trilinear(
    ctx: &FieldContext,
    f: &Subgroup,
    g: &Subgroup,
    h: &Subgroup,
    a: u64,
    weights: &WeightTable,
) -> Result<Complex64> {
    let a = ctx.reduce(a);
    if a == 0 {
        return Err(Error::ZeroCoefficient);
    }
    if weights.dims() != (f.len(), g.len(), h.len()) {
        return Err(Error::WeightShape);
    }
    let work = f.order().saturating_mul(g.order()).saturating_mul(h.order());
    if work > TRILINEAR_LIMIT {
        return Err(Error::TooLarge {
            what: "|F||G||H|",
            value: work,
            limit: TRILINEAR_LIMIT,
        });
    }
    let rows: Vec<CompensatedSum> = f
        .elements()
        .par_iter()
        .enumerate()
        .map(|(ui, &u)| {
            let au = ctx.mul(a, u);
            let mut acc = CompensatedSum::new();
            for (vi, &v) in g.elements().iter().enumerate() {
                let auv = ctx.mul(au, v);
                let r = weights.rho(ui, vi);
                let mut inner = Complex64::new(0.0, 0.0);
                for (wi, &w) in h.elements().iter().enumerate() {
                    inner += weights.sigma(ui, wi) * weights.tau(vi, wi) * ctx.additive_root(ctx.mul(auv, w));
                }
                acc.add(r * inner);
            }
            acc
        })
        .collect();
    let mut total = CompensatedSum::new();
    for row in &rows {
        total.merge(row);
    }
    Ok(total.value())
}
