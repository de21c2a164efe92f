//! Exact integer cyclic convolution through two NTT primes and CRT.

const P1: u64 = 998_244_353;
const P2: u64 = 469_762_049;
const ROOT: u64 = 3;

/// Largest supported transform length for both primes.
pub const MAX_LEN: usize = 1 << 23;

fn pow(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r
}

fn transform(a: &mut [u64], invert: bool, m: u64) {
    let n = a.len();
    let mut j = 0;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j ^= bit;
        if i < j {
            a.swap(i, j);
        }
    }
    let mut len = 2;
    while len <= n {
        let mut w = pow(ROOT, (m - 1) / len as u64, m);
        if invert {
            w = pow(w, m - 2, m);
        }
        for chunk in a.chunks_mut(len) {
            let mut wn = 1u64;
            let (lo, hi) = chunk.split_at_mut(len / 2);
            for (x, y) in lo.iter_mut().zip(hi.iter_mut()) {
                let u = *x;
                let v = *y * wn % m;
                *x = if u + v >= m { u + v - m } else { u + v };
                *y = if u >= v { u - v } else { u + m - v };
                wn = wn * w % m;
            }
        }
        len <<= 1;
    }
    if invert {
        let inv_n = pow(n as u64, m - 2, m);
        a.iter_mut().for_each(|x| *x = *x * inv_n % m);
    }
}

fn self_convolve_mod(a: &[u64], len: usize, m: u64) -> Vec<u64> {
    let mut f = vec![0u64; len];
    for (dst, &x) in f.iter_mut().zip(a) {
        *dst = x % m;
    }
    transform(&mut f, false, m);
    f.iter_mut().for_each(|x| *x = *x * *x % m);
    transform(&mut f, true, m);
    f
}

/// `c[k] = sum_{i + j = k mod n} a[i] a[j]` for `n = a.len()`.
///
/// Exact provided every true coefficient is below `P1 * P2` (about 4.7e17).
/// Returns `None` when the transform would exceed [`MAX_LEN`].
pub fn cyclic_self_convolution(a: &[u64]) -> Option<Vec<u64>> {
    let n = a.len();
    let len = (2 * n).next_power_of_two().max(1);
    if len > MAX_LEN {
        return None;
    }
    let r1 = self_convolve_mod(a, len, P1);
    let r2 = self_convolve_mod(a, len, P2);
    let p1_inv = pow(P1 % P2, P2 - 2, P2);
    let mut out = vec![0u64; n];
    for k in 0..len {
        // CRT: x = r1 + P1 * ((r2 - r1) * P1^{-1} mod P2).
        let diff = (r2[k] + P2 - r1[k] % P2) % P2;
        let t = diff as u128 * p1_inv as u128 % P2 as u128;
        let x = r1[k] as u128 + P1 as u128 * t;
        if x != 0 {
            out[k % n] += x as u64;
        }
    }
    Some(out)
}
