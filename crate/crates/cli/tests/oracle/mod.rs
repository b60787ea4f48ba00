//! Reference implementations used only by the acceptance gate.
//!
//! Nothing here calls into the library: B-splines come from the plain
//! Cox–de Boor recursion, the periodic basis is folded by hand, the
//! zero-integral constraint is imposed through quadrature of the folded
//! basis, and linear systems are solved by Gaussian elimination.

pub type Mat = Vec<Vec<f64>>;

/// 5-point Gauss–Legendre rule on [-1, 1], exact to degree 9.
const GL5: [(f64, f64); 5] = [
    (0.0, 0.568_888_888_888_888_9),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
    (0.906_179_845_938_664, 0.236_926_885_056_189_1),
];

pub struct Space {
    k: usize,
    /// `λ_0 = a, λ_1..λ_g, λ_{g+1} = b`.
    pub breaks: Vec<f64>,
    /// `λ_{-k} .. λ_{g+k+1}`; `t[i + k] = λ_i`.
    t: Vec<f64>,
    /// Coefficient of the last periodic function when it is eliminated.
    elim: Vec<f64>,
}

impl Space {
    pub fn new(a: f64, b: f64, k: usize, inner: &[f64]) -> Self {
        let g = inner.len();
        let mut breaks = vec![a];
        breaks.extend_from_slice(inner);
        breaks.push(b);
        // λ_j for j = -k..=g+k+1, shifting λ_{j mod (g+1)} by whole periods
        let cells = (g + 1) as i64;
        let t: Vec<f64> = (-(k as i64)..=cells + k as i64)
            .map(|j| breaks[j.rem_euclid(cells) as usize] + j.div_euclid(cells) as f64 * (b - a))
            .collect();
        let mut space = Space { k, breaks, t, elim: Vec::new() };
        let integrals: Vec<f64> = (0..=g).map(|j| space.integrate(|x| space.periodic(x, 0)[j])).collect();
        space.elim = (0..g).map(|j| -integrals[j] / integrals[g]).collect();
        space
    }

    pub fn g(&self) -> usize {
        self.breaks.len() - 2
    }

    fn span(&self, x: f64) -> usize {
        let g = self.g();
        (0..=g).find(|&j| x >= self.breaks[j] && x < self.breaks[j + 1]).unwrap_or(g)
    }

    /// `l`-th derivative of the degree-`d` B-spline starting at `t[pos]`.
    fn bspline(&self, pos: usize, d: usize, l: usize, x: f64, span: usize) -> f64 {
        if d == 0 {
            return if l == 0 && pos == span + self.k { 1.0 } else { 0.0 };
        }
        let t = &self.t;
        let left = t[pos + d] - t[pos];
        let right = t[pos + d + 1] - t[pos + 1];
        if l > 0 {
            let mut v = 0.0;
            if left > 0.0 {
                v += d as f64 * self.bspline(pos, d - 1, l - 1, x, span) / left;
            }
            if right > 0.0 {
                v -= d as f64 * self.bspline(pos + 1, d - 1, l - 1, x, span) / right;
            }
            return v;
        }
        let mut v = 0.0;
        if left > 0.0 {
            v += (x - t[pos]) / left * self.bspline(pos, d - 1, 0, x, span);
        }
        if right > 0.0 {
            v += (t[pos + d + 1] - x) / right * self.bspline(pos + 1, d - 1, 0, x, span);
        }
        v
    }

    /// All `g + k + 1` full-space B-splines (or derivatives) at `x ∈ [a, b]`.
    pub fn full(&self, x: f64, l: usize) -> Vec<f64> {
        let span = self.span(x);
        (0..self.g() + self.k + 1).map(|pos| self.bspline(pos, self.k, l, x, span)).collect()
    }

    /// The `g + 1` periodic functions: the last `k` B-splines wrap onto the first `k`.
    pub fn periodic(&self, x: f64, l: usize) -> Vec<f64> {
        let g = self.g();
        let full = self.full(x, l);
        let mut per = full[..=g].to_vec();
        for j in 0..self.k {
            per[j] += full[g + 1 + j];
        }
        per
    }

    /// The `g` zero-integral functions.
    pub fn reduced(&self, x: f64, l: usize) -> Vec<f64> {
        let g = self.g();
        let per = self.periodic(x, l);
        (0..g).map(|j| per[j] + self.elim[j] * per[g]).collect()
    }

    pub fn eval(&self, coeffs: &[f64], x: f64, l: usize) -> f64 {
        self.reduced(x, l).iter().zip(coeffs).map(|(p, c)| p * c).sum()
    }

    /// Piecewise Gauss–Legendre over the knot intervals.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.breaks
            .windows(2)
            .map(|w| {
                let (m, h) = (0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0]));
                GL5.iter().map(|(x, wt)| wt * h * f(m + h * x)).sum::<f64>()
            })
            .sum()
    }

    /// `∫ ψᵢ⁽ˡ⁾ ψⱼ⁽ˡ⁾` over `[a, b]`.
    pub fn roughness(&self, l: usize) -> Mat {
        let g = self.g();
        let mut r = vec![vec![0.0; g]; g];
        for w in self.breaks.windows(2) {
            let (m, h) = (0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0]));
            for (x, wt) in GL5 {
                let v = self.reduced(m + h * x, l);
                for i in 0..g {
                    for j in 0..g {
                        r[i][j] += wt * h * v[i] * v[j];
                    }
                }
            }
        }
        r
    }

    pub fn design(&self, xs: &[f64]) -> Mat {
        xs.iter().map(|&x| self.reduced(x, 0)).collect()
    }
}

pub fn transpose(a: &Mat) -> Mat {
    (0..a[0].len()).map(|j| a.iter().map(|row| row[j]).collect()).collect()
}

pub fn matmul(a: &Mat, b: &Mat) -> Mat {
    a.iter()
        .map(|row| (0..b[0].len()).map(|j| row.iter().zip(b).map(|(x, brow)| x * brow[j]).sum()).collect())
        .collect()
}

pub fn matvec(a: &Mat, v: &[f64]) -> Vec<f64> {
    a.iter().map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum()).collect()
}

pub fn scale_rows(a: &Mat, w: &[f64]) -> Mat {
    a.iter().zip(w).map(|(row, wi)| row.iter().map(|x| x * wi).collect()).collect()
}

pub fn lincomb(a: &Mat, sa: f64, b: &Mat, sb: f64) -> Mat {
    a.iter().zip(b).map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| sa * x + sb * y).collect()).collect()
}

/// Solves `A X = B` by Gaussian elimination with partial pivoting.
pub fn solve(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    let m = b[0].len();
    let mut aug: Mat = a.iter().zip(b).map(|(ra, rb)| ra.iter().chain(rb).copied().collect()).collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| aug[i][col].abs().total_cmp(&aug[j][col].abs())).unwrap();
        aug.swap(col, piv);
        let (top, rest) = aug.split_at_mut(col + 1);
        let pivot_row = &top[col];
        for row in rest.iter_mut() {
            let f = row[col] / pivot_row[col];
            if f != 0.0 {
                for (x, p) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                    *x -= f * p;
                }
            }
        }
    }
    let mut x = vec![vec![0.0; m]; n];
    for row in (0..n).rev() {
        for c in 0..m {
            let s: f64 = (row + 1..n).map(|j| aug[row][j] * x[j][c]).sum();
            x[row][c] = (aug[row][n + c] - s) / aug[row][row];
        }
    }
    x
}

pub fn solve_vec(a: &Mat, b: &[f64]) -> Vec<f64> {
    solve(a, &b.iter().map(|v| vec![*v]).collect()).into_iter().map(|r| r[0]).collect()
}

/// `d`-th order forward differences of `g` values.
pub fn differences(g: usize, d: usize) -> Mat {
    let mut m: Mat = (0..g).map(|i| (0..g).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    for _ in 0..d {
        m = m.windows(2).map(|w| w[1].iter().zip(&w[0]).map(|(x, y)| x - y).collect()).collect();
    }
    m
}

/// Normal equations and hat matrix of one penalized least-squares fit.
pub struct Fit {
    pub coeffs: Vec<f64>,
    pub hat: Mat,
}

/// `[(1-α)R + αΦᵀWΦ] b = αΦᵀWy`.
pub fn smoothing_fit(space: &Space, xs: &[f64], ys: &[f64], ws: &[f64], alpha: f64, l: usize) -> Fit {
    let phi = space.design(xs);
    let phit_w = transpose(&scale_rows(&phi, ws));
    let lhs = lincomb(&space.roughness(l), 1.0 - alpha, &matmul(&phit_w, &phi), alpha);
    let rhs: Vec<f64> = matvec(&phit_w, ys).iter().map(|v| alpha * v).collect();
    let coeffs = solve_vec(&lhs, &rhs);
    let hat = matmul(&phi, &solve(&lhs, &phit_w)).iter().map(|r| r.iter().map(|v| alpha * v).collect()).collect();
    Fit { coeffs, hat }
}

/// `[ΦᵀWΦ + ρDᵀD] b = ΦᵀWy`.
pub fn pspline_fit(space: &Space, xs: &[f64], ys: &[f64], ws: &[f64], rho: f64, d: usize) -> Fit {
    let phi = space.design(xs);
    let phit_w = transpose(&scale_rows(&phi, ws));
    let dm = differences(space.g(), d);
    let lhs = lincomb(&matmul(&phit_w, &phi), 1.0, &matmul(&transpose(&dm), &dm), rho);
    let coeffs = solve_vec(&lhs, &matvec(&phit_w, ys));
    let hat = matmul(&phi, &solve(&lhs, &phit_w));
    Fit { coeffs, hat }
}

/// `(SSE/n) / (1 - tr(H)/n)²` with unweighted SSE.
pub fn gcv(fit: &Fit, ys: &[f64]) -> f64 {
    let n = ys.len() as f64;
    let fitted = matvec(&fit.hat, ys);
    let sse: f64 = ys.iter().zip(&fitted).map(|(y, f)| (y - f).powi(2)).sum();
    let tr: f64 = (0..ys.len()).map(|i| fit.hat[i][i]).sum();
    (sse / n) / (1.0 - tr / n).powi(2)
}

/// `(1-α)∫(s⁽ˡ⁾)² + α Σ wᵢ(yᵢ - s(xᵢ))²`, evaluated pointwise.
pub fn functional(space: &Space, coeffs: &[f64], xs: &[f64], ys: &[f64], ws: &[f64], alpha: f64, l: usize) -> f64 {
    let rough = space.integrate(|x| space.eval(coeffs, x, l).powi(2));
    let data: f64 = xs.iter().zip(ys).zip(ws).map(|((x, y), w)| w * (y - space.eval(coeffs, *x, 0)).powi(2)).sum();
    (1.0 - alpha) * rough + alpha * data
}

pub fn max_abs(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    max_abs(a.iter().zip(b).map(|(x, y)| x - y)) / max_abs(b.iter().copied()).max(f64::MIN_POSITIVE)
}
