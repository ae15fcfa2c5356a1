//! Small numerical and number-theoretic helpers shared by the energy,
//! symmetry and torus modules.

use rayon::prelude::*;

/// Rows per parallel work unit. Fixed so the summation tree does not
/// depend on the number of worker threads.
pub(crate) const CHUNK: usize = 16;

/// Riemann zeta function for real `s != 1`, by Euler–Maclaurin summation.
///
/// Accurate to roughly machine precision for `s > -3`, which covers the
/// arguments used by the near-diagonal corrections (`s` in (-1, 3)).
pub fn zeta(s: f64) -> f64 {
    assert!((s - 1.0).abs() > 1e-12, "zeta has a pole at s = 1");
    const N: usize = 16;
    // B_{2j} / (2j)!
    const COEFFS: [f64; 7] = [
        1.0 / 12.0,
        -1.0 / 720.0,
        1.0 / 30240.0,
        -1.0 / 1209600.0,
        1.0 / 47900160.0,
        -691.0 / 1307674368000.0,
        1.0 / 74724249600.0,
    ];
    let n = N as f64;
    let mut sum: f64 = (1..N).map(|k| (k as f64).powf(-s)).sum();
    sum += n.powf(1.0 - s) / (s - 1.0) + 0.5 * n.powf(-s);
    // rising factorial s (s+1) ... (s+2j-2) times n^{-s-2j+1}
    let mut rising = s;
    let mut npow = n.powf(-s - 1.0);
    for (j, c) in COEFFS.iter().enumerate() {
        sum += c * rising * npow;
        let a = s + (2 * j + 1) as f64;
        let b = s + (2 * j + 2) as f64;
        rising *= a * b;
        npow /= n * n;
    }
    sum
}

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1);
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

pub fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.unsigned_abs(), b.unsigned_abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a as i64
}

/// Extended Euclid: returns `(g, x, y)` with `a x + b y = g = gcd(a, b)`.
pub fn extended_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    let (mut old_r, mut r) = (a, b);
    let (mut old_s, mut s) = (1i64, 0i64);
    let (mut old_t, mut t) = (0i64, 1i64);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
        (old_t, t) = (t, old_t - q * t);
    }
    if old_r < 0 {
        (-old_r, -old_s, -old_t)
    } else {
        (old_r, old_s, old_t)
    }
}

/// Inverse of `a` modulo `m`, in `0..m`, if it exists.
pub fn mod_inverse(a: i64, m: i64) -> Option<i64> {
    let (g, x, _) = extended_gcd(a.rem_euclid(m), m);
    (g == 1).then(|| x.rem_euclid(m))
}

/// Divisors of `n > 0` in increasing order.
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

/// Evaluates `row(i)` for `i in 0..n` in parallel and folds the results
/// with `combine` in a fixed order: rows are summed sequentially inside
/// fixed-size chunks, then chunk totals are summed in index order. The
/// result is bitwise reproducible for any thread count.
pub(crate) fn ordered_reduce<T, R, C, E>(n: usize, zero: impl Fn() -> T + Sync, row: R, combine: C) -> Result<T, E>
where
    T: Send,
    E: Send,
    R: Fn(usize, &mut T) -> Result<(), E> + Sync,
    C: Fn(&mut T, T),
{
    let chunks: Vec<Result<T, E>> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut acc = zero();
            for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
                row(i, &mut acc)?;
            }
            Ok(acc)
        })
        .collect();
    let mut total = zero();
    for chunk in chunks {
        combine(&mut total, chunk?);
    }
    Ok(total)
}
