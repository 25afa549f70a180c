//! Straight-line reference implementations used to check the library.
//!
//! Every function here is written directly from the printed formulas, with
//! no shared code beyond `f64` arithmetic. Nothing in `overpass_qkd` is
//! called except for building inputs.
#![allow(dead_code)]

use num_bigint::BigUint;
use num_traits::{One, Zero};

pub const DEFAULT_X: [f64; 5] = [0.5, 0.7, 0.1, 0.8, 0.3];
pub const DEFAULT_XB: [[f64; 2]; 5] =
    [[0.3, 1.0], [0.6, 0.9999], [0.0, 0.4], [0.3, 1.0], [0.1, 0.5]];

pub fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

pub fn h(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        0.0
    } else {
        -x * x.log2() - (1.0 - x) * (1.0 - x).log2()
    }
}

pub fn tau(n: i32, mu: [f64; 3], p: [f64; 3]) -> f64 {
    let mut fact = 1.0;
    for k in 1..=n {
        fact *= k as f64;
    }
    let mut s = 0.0;
    for j in 0..3 {
        s += (-mu[j]).exp() * mu[j].powi(n) * p[j] / fact;
    }
    s
}

pub fn chernoff_plus(n: f64, mu: f64, p: f64, eps_s: f64) -> f64 {
    let l = (21.0 / eps_s).ln();
    mu.exp() / p * (n + l + (2.0 * n * l + l * l).sqrt())
}

pub fn chernoff_minus(n: f64, mu: f64, p: f64, eps_s: f64) -> f64 {
    let l = (21.0 / eps_s).ln();
    let v = mu.exp() / p * (n - l / 2.0 - (2.0 * n * l + l * l / 4.0).sqrt());
    v.max(0.0)
}

pub fn hoeffding(n: f64, total: f64, mu: f64, p: f64, eps_s: f64) -> (f64, f64) {
    let delta = (total / 2.0 * (21.0 / eps_s).ln()).sqrt();
    let k = mu.exp() / p;
    ((k * (n - delta)).max(0.0), k * (n + delta))
}

/// `(lower, upper)` per intensity. `kind`: 0 Chernoff, 1 Hoeffding, 2 asymptotic.
pub fn bounds(n: [f64; 3], mu: [f64; 3], p: [f64; 3], eps_s: f64, kind: u8) -> ([f64; 3], [f64; 3]) {
    let total = n[0] + n[1] + n[2];
    let mut lo = [0.0; 3];
    let mut hi = [0.0; 3];
    for j in 0..3 {
        match kind {
            0 => {
                lo[j] = chernoff_minus(n[j], mu[j], p[j], eps_s);
                hi[j] = chernoff_plus(n[j], mu[j], p[j], eps_s);
            }
            1 => (lo[j], hi[j]) = hoeffding(n[j], total, mu[j], p[j], eps_s),
            _ => {
                lo[j] = mu[j].exp() / p[j] * n[j];
                hi[j] = lo[j];
            }
        }
    }
    (lo, hi)
}

pub fn s0(lo: [f64; 3], hi: [f64; 3], mu: [f64; 3], p: [f64; 3]) -> f64 {
    let v = tau(0, mu, p) * (mu[1] * lo[2] - mu[2] * hi[1]) / (mu[1] - mu[2]);
    v.max(0.0)
}

pub fn s1(lo: [f64; 3], hi: [f64; 3], s0: f64, mu: [f64; 3], p: [f64; 3]) -> f64 {
    let (m1, m2, m3) = (mu[0], mu[1], mu[2]);
    let num = m1 * (lo[1] - hi[2] - (m2 * m2 - m3 * m3) / (m1 * m1) * (hi[0] - s0 / tau(0, mu, p)));
    let den = m1 * (m2 - m3) - m2 * m2 + m3 * m3;
    (tau(1, mu, p) * num / den).max(0.0)
}

pub fn v1(lo: [f64; 3], hi: [f64; 3], mu: [f64; 3], p: [f64; 3]) -> f64 {
    (tau(1, mu, p) * (hi[1] - lo[2]) / (mu[1] - mu[2])).max(0.0)
}

pub fn gamma(a: f64, b: f64, c: f64, d: f64) -> f64 {
    if b <= 0.0 || b >= 1.0 {
        return 0.0;
    }
    let arg = (c + d) / (b * c * d * (1.0 - b)) * 441.0 / (a * a);
    let r = (c + d) * (1.0 - b) * b / (c * d * 2f64.ln()) * arg.log2();
    if r > 0.0 {
        r.sqrt()
    } else {
        0.0
    }
}

/// Phase error rate, capped at one half like the library.
pub fn phi(vz1: f64, sz1: f64, sx1: f64, eps_s: f64, finite: bool) -> f64 {
    let b = vz1 / sz1;
    let g = if finite { gamma(eps_s, b, sz1, sx1) } else { 0.0 };
    (b + g).min(0.5)
}

fn log_factorials(n: u64) -> Vec<f64> {
    let mut lf = vec![0.0; n as usize + 1];
    for i in 1..=n as usize {
        lf[i] = lf[i - 1] + (i as f64).ln();
    }
    lf
}

/// Smallest k with P[X ≤ k] ≥ eps by summing the pmf upwards from 0.
/// Probabilities of exactly one half are summed in exact integer arithmetic
/// so that ties resolve correctly.
pub fn binom_quantile(eps: f64, n: u64, p: f64) -> u64 {
    if p == 0.5 {
        return binom_quantile_half(eps, n);
    }
    if p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    let lf = log_factorials(n);
    let (lp, lq) = (p.ln(), (1.0 - p).ln());
    let mut cdf = 0.0;
    let mut comp = 0.0;
    for k in 0..=n {
        let ku = k as usize;
        let term = (lf[n as usize] - lf[ku] - lf[n as usize - ku] + k as f64 * lp + (n - k) as f64 * lq).exp();
        // Neumaier summation.
        let t = cdf + term;
        if cdf.abs() >= term.abs() {
            comp += (cdf - t) + term;
        } else {
            comp += (term - t) + cdf;
        }
        cdf = t;
        if cdf + comp >= eps {
            return k;
        }
    }
    n
}

fn binom_quantile_half(eps: f64, n: u64) -> u64 {
    // P[X ≤ k] ≥ eps  ⇔  Σ_{i≤k} C(n,i) ≥ eps · 2^n, compared exactly by
    // writing eps = m · 2^e with integer m.
    let (m, e) = decompose(eps);
    let shift = n as i64 + e;
    let (target, acc_shift) = if shift >= 0 {
        (BigUint::from(m) << shift as usize, 0)
    } else {
        (BigUint::from(m), (-shift) as usize)
    };
    let mut c = BigUint::one();
    let mut acc = BigUint::zero();
    for k in 0..=n {
        acc += &c;
        if (&acc << acc_shift) >= target {
            return k;
        }
        c = c * BigUint::from(n - k) / BigUint::from(k + 1);
    }
    n
}

fn decompose(x: f64) -> (u64, i64) {
    let bits = x.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    if exp == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), exp - 1075)
    }
}

/// Exact summation up to a million trials, continuity-corrected normal
/// approximation above.
pub fn logm_quantile(eps: f64, n: u64, p: f64) -> u64 {
    if n <= 1_000_000 {
        return binom_quantile(eps, n, p);
    }
    let nf = n as f64;
    let z = -std::f64::consts::SQRT_2 * statrs::function::erf::erfc_inv(2.0 * eps);
    (nf * p + z * (nf * p * (1.0 - p)).sqrt() - 0.5).ceil().clamp(0.0, nf) as u64
}

/// logM leakage, natural logarithms unless the `ec-log2` feature is on.
pub fn lambda_logm(nx: [f64; 3], mx: [f64; 3], eps_c: f64) -> f64 {
    let n: f64 = nx.iter().sum();
    let q = mx.iter().sum::<f64>() / n;
    if q <= 0.0 || q >= 1.0 {
        return lambda_block(nx, mx);
    }
    let lg = |x: f64| if cfg!(feature = "ec-log2") { x.log2() } else { x.ln() };
    let f_inv = logm_quantile(eps_c, n.floor() as u64, 1.0 - q) as f64;
    let v = n * h(q) + (n * (1.0 - q) - f_inv - 1.0) * lg((1.0 - q) / q) - 0.5 * lg(n) - lg(1.0 / eps_c);
    v.max(0.0)
}

pub fn lambda_block(nx: [f64; 3], mx: [f64; 3]) -> f64 {
    let n: f64 = nx.iter().sum();
    1.16 * n * h(mx.iter().sum::<f64>() / n)
}

pub fn lambda_mxtot(mx: [f64; 3]) -> f64 {
    1.16 * (mx[0] + mx[1] + mx[2])
}

/// Counts in the order `(n_x, n_z, m_x, m_z)`.
#[derive(Debug, Clone, Copy)]
pub struct Counts {
    pub nx: [f64; 3],
    pub nz: [f64; 3],
    pub mx: [f64; 3],
    pub mz: [f64; 3],
}

#[derive(Debug, Clone, Copy)]
pub struct Channel {
    pub pec: f64,
    pub qberi: f64,
    pub pap: f64,
    pub rate: f64,
    pub passes: u32,
}

/// Expected sifted counts over a window of slot efficiencies.
pub fn counts(effs: &[f64], slot: f64, x: [f64; 5], mu3: f64, ch: Channel) -> Counts {
    let [px, p1, p2, mu1, mu2] = x;
    let mu = [mu1, mu2, mu3];
    let p = [p1, p2, 1.0 - p1 - p2];
    let pulses = ch.rate * slot * ch.passes as f64;
    let mut c = Counts {
        nx: [0.0; 3],
        nz: [0.0; 3],
        mx: [0.0; 3],
        mz: [0.0; 3],
    };
    for j in 0..3 {
        let mut dsum = 0.0;
        let mut esum = 0.0;
        for &eta in effs {
            let a = (-eta * mu[j]).exp();
            let d = ((1.0 + ch.pap) * (1.0 - (1.0 - 2.0 * ch.pec) * a)).clamp(0.0, 1.0);
            let e = ch.pec + ch.qberi * (1.0 - a) + ch.pap / 2.0 * (1.0 - (1.0 - 2.0 * ch.pec) * a);
            dsum += d;
            esum += e.clamp(0.0, d);
        }
        c.nx[j] = pulses * p[j] * px * px * dsum;
        c.nz[j] = pulses * p[j] * (1.0 - px) * (1.0 - px) * dsum;
        c.mx[j] = pulses * p[j] * px * px * esum;
        c.mz[j] = pulses * p[j] * (1.0 - px) * (1.0 - px) * esum;
    }
    c
}

/// Intermediate quantities and the key length, mirroring the output columns.
#[derive(Debug, Clone, Copy, Default)]
pub struct Key {
    pub skl: u64,
    pub real: f64,
    pub qber: f64,
    pub phi: f64,
    pub lambda: f64,
    pub sx0: f64,
    pub sx1: f64,
    pub vz1: f64,
    pub sz1: f64,
}

/// `bound`: 0 Chernoff, 1 Hoeffding, 2 asymptotic. `ec`: 0 logM, 1 block,
/// 2 mXtot, 3 none.
pub fn key_length(c: &Counts, mu: [f64; 3], p: [f64; 3], eps_c: f64, eps_s: f64, bound: u8, ec: u8) -> Key {
    let nx_tot: f64 = c.nx.iter().sum();
    let mut k = Key {
        phi: 0.5,
        ..Key::default()
    };
    if !(nx_tot > 0.0) {
        return k;
    }
    k.qber = c.mx.iter().sum::<f64>() / nx_tot;
    k.lambda = match ec {
        0 => lambda_logm(c.nx, c.mx, eps_c),
        1 => lambda_block(c.nx, c.mx),
        2 => lambda_mxtot(c.mx),
        _ => 0.0,
    };
    let (nxl, nxu) = bounds(c.nx, mu, p, eps_s, bound);
    let (nzl, nzu) = bounds(c.nz, mu, p, eps_s, bound);
    let (mzl, mzu) = bounds(c.mz, mu, p, eps_s, bound);
    k.sx0 = s0(nxl, nxu, mu, p);
    k.sx1 = s1(nxl, nxu, k.sx0, mu, p);
    let sz0 = s0(nzl, nzu, mu, p);
    k.sz1 = s1(nzl, nzu, sz0, mu, p);
    k.vz1 = v1(mzl, mzu, mu, p);
    if !(k.sz1 > 0.0 && k.sx1 > 0.0) {
        return k;
    }
    k.phi = phi(k.vz1, k.sz1, k.sx1, eps_s, bound != 2);
    let penalty = if bound == 2 {
        0.0
    } else {
        6.0 * (21.0 / eps_s).log2() + (2.0 / eps_c).log2()
    };
    k.real = k.sx0 + k.sx1 * (1.0 - h(k.phi)) - k.lambda - penalty;
    k.skl = if k.real > 0.0 { k.real.floor() as u64 } else { 0 };
    k
}

/// Peak elevation in degrees for orbit offset `xi` (radians).
pub fn theta_max(re: f64, h_sat: f64, h_ogs: f64, xi: f64) -> f64 {
    let a = re + h_sat;
    let b = re + h_ogs;
    (a * xi.sin() / (a * a + b * b - 2.0 * a * b * xi.cos()).sqrt()).acos().to_degrees()
}
