//! Independent numerical oracles shared by the integration tests. Nothing
//! here calls into the library's exact polynomial code.
#![allow(dead_code, clippy::excessive_precision, clippy::needless_range_loop)]

/// `P_n(x)` and `P_n'(x)` by the three-term recurrence.
pub fn legendre(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p0, mut p1) = (1.0, x);
    for k in 1..n {
        let p2 = ((2 * k + 1) as f64 * x * p1 - k as f64 * p0) / (k + 1) as f64;
        p0 = p1;
        p1 = p2;
    }
    let dp = if (x * x - 1.0).abs() < 1e-300 {
        0.5 * (n * (n + 1)) as f64 * x.powi(n as i32 + 1)
    } else {
        n as f64 * (x * p1 - p0) / (x * x - 1.0)
    };
    (p1, dp)
}

/// `n`-point Gauss–Legendre nodes and weights on `[-1, 1]` (Newton on the
/// Chebyshev initial guesses).
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// `∫_a^b f` with Gauss–Legendre of `n` points.
pub fn gl_integrate(n: usize, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let (c, h) = ((a + b) / 2.0, (b - a) / 2.0);
    gauss_legendre(n)
        .iter()
        .map(|&(x, w)| w * f(c + h * x))
        .sum::<f64>()
        * h
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let (c, h) = ((a + b) / 2.0, (b - a) / 2.0);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let s = f(c - h * XGK[i]) + f(c + h * XGK[i]);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive Gauss–Kronrod (7/15) quadrature to absolute tolerance `tol`.
pub fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn go(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let (v, err) = gk15(f, a, b);
        if err <= tol || depth == 0 || (b - a).abs() < 1e-12 {
            return v;
        }
        let m = (a + b) / 2.0;
        go(f, a, m, tol / 2.0, depth - 1) + go(f, m, b, tol / 2.0, depth - 1)
    }
    if a == b {
        return 0.0;
    }
    go(f, a, b, tol, 30)
}

fn weight(l: u8, x: f64) -> f64 {
    (-(x + 1.0)).powi(l as i32)
}

/// `C̄` for weights `w` (innermost first) and indices `j` by fully nested
/// adaptive quadrature over the ordered simplex of `[-1, 1]^k`.
pub fn cbar_adaptive(w: &[u8], j: &[usize], tol: f64) -> f64 {
    fn inner(w: &[u8], j: &[usize], level: usize, x: f64, tol: f64) -> f64 {
        // ∫_{-1}^{x} P_{j_level} w_level · (next inner) dy
        let f = |y: f64| {
            let rest = if level == 0 {
                1.0
            } else {
                inner(w, j, level - 1, y, tol)
            };
            legendre(j[level], y).0 * weight(w[level], y) * rest
        };
        adaptive(&f, -1.0, x, tol)
    }
    inner(w, j, w.len() - 1, 1.0, tol)
}

/// Float Legendre-series collocation: inner functions are held as Legendre
/// series, products formed at Gauss nodes and projected back, antiderivatives
/// taken term by term.
pub struct Collocation {
    nodes: Vec<(f64, f64)>,
    /// `P_n(x_i)` for every node `i` and degree `n < deg`.
    p: Vec<Vec<f64>>,
    deg: usize,
}

impl Collocation {
    /// Handles series of degree below `deg`; exact while integrands stay
    /// below that degree.
    pub fn new(deg: usize) -> Self {
        let nodes = gauss_legendre(deg + 2);
        let p = nodes
            .iter()
            .map(|&(x, _)| (0..deg).map(|n| legendre(n, x).0).collect())
            .collect();
        Self { nodes, p, deg }
    }

    fn eval_at_nodes(&self, c: &[f64]) -> Vec<f64> {
        self.p
            .iter()
            .map(|row| row.iter().zip(c).map(|(a, b)| a * b).sum())
            .collect()
    }

    // Top coefficient left out so the antiderivative stays in range.
    fn project(&self, vals: &[f64]) -> Vec<f64> {
        (0..self.deg - 1)
            .map(|n| {
                let s: f64 = self
                    .nodes
                    .iter()
                    .zip(vals)
                    .zip(&self.p)
                    .map(|(((_, w), v), row)| w * v * row[n])
                    .sum();
                s * (2 * n + 1) as f64 / 2.0
            })
            .collect()
    }

    // ∫_{-1}^{x} Σ a_n P_n as a series.
    fn antiderivative(&self, a: &[f64]) -> Vec<f64> {
        let mut b = vec![0.0; self.deg];
        for (n, &an) in a.iter().enumerate() {
            if an == 0.0 {
                continue;
            }
            if n == 0 {
                b[0] += an;
                b[1] += an;
            } else {
                let s = an / (2 * n + 1) as f64;
                assert!(n + 1 < self.deg, "collocation degree too small");
                b[n + 1] += s;
                b[n - 1] -= s;
            }
        }
        b
    }

    /// One nesting level: `∫_{-1}^{x} P_j(y) w(y) g(y) dy`.
    pub fn level(&self, g: &[f64], j: usize, l: u8) -> Vec<f64> {
        let gv = self.eval_at_nodes(g);
        let vals: Vec<f64> = self
            .nodes
            .iter()
            .zip(gv)
            .map(|(&(x, _), v)| legendre(j, x).0 * weight(l, x) * v)
            .collect();
        self.antiderivative(&self.project(&vals))
    }

    pub fn one(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.deg];
        c[0] = 1.0;
        c
    }

    /// Value of a series at `x = 1`.
    pub fn at_one(c: &[f64]) -> f64 {
        c.iter().sum()
    }

    /// All `C̄` with indices `≤ q`, `j_1` fastest (prefixes shared).
    pub fn block(&self, w: &[u8], q: usize) -> Vec<f64> {
        let n = q + 1;
        let k = w.len();
        let mut layer: Vec<Vec<f64>> = vec![self.one()];
        for level in 0..k {
            let mut next = Vec::with_capacity(layer.len() * n);
            // New index becomes the slowest so far: outer loop over it.
            for j in 0..n {
                for g in &layer {
                    next.push(self.level(g, j, w[level]));
                }
            }
            layer = next;
        }
        layer.iter().map(|c| Self::at_one(c)).collect()
    }
}

/// Flat index with `j_1` fastest.
pub fn unflatten(mut flat: usize, n: usize, k: usize) -> Vec<usize> {
    (0..k)
        .map(|_| {
            let j = flat % n;
            flat /= n;
            j
        })
        .collect()
}

/// Mean and standard error.
pub fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// `n` i.i.d. standard normals from a small explicit generator
/// (SplitMix64 + Box–Muller), independent of the library's streams.
pub fn normals(seed: u64, n: usize) -> Vec<f64> {
    let mut s = seed;
    let mut next = move || {
        s = s.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = s;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
        ((z >> 11) as f64 + 0.5) / (1u64 << 53) as f64
    };
    let mut out = Vec::with_capacity(n + 1);
    while out.len() < n {
        let (u1, u2) = (next(), next());
        let r = (-2.0 * u1.ln()).sqrt();
        let t = 2.0 * std::f64::consts::PI * u2;
        out.push(r * t.cos());
        out.push(r * t.sin());
    }
    out.truncate(n);
    out
}

/// Standard normal CDF via the complementary error function (Chebyshev
/// fit, relative error below 1.2e-7).
pub fn normal_cdf(x: f64) -> f64 {
    let z = x.abs() / std::f64::consts::SQRT_2;
    let t = 1.0 / (1.0 + 0.5 * z);
    let poly = -z * z - 1.26551223
        + t * (1.00002368
            + t * (0.37409196
                + t * (0.09678418
                    + t * (-0.18628806
                        + t * (0.27886807
                            + t * (-1.13520398
                                + t * (1.48851587 + t * (-0.82215223 + t * 0.17087277))))))));
    let erfc = t * poly.exp();
    if x >= 0.0 {
        1.0 - 0.5 * erfc
    } else {
        0.5 * erfc
    }
}

/// Kolmogorov–Smirnov statistic of `sample` against the standard normal.
pub fn ks_normal(sample: &[f64]) -> f64 {
    let mut s = sample.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = normal_cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Pearson correlation.
pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let (ma, _) = mean_se(a);
    let (mb, _) = mean_se(b);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma).powi(2);
        sbb += (y - mb).powi(2);
    }
    sab / (saa * sbb).sqrt()
}
