//! Small fixed-size linear algebra and truncated Taylor jets.

pub type Vec3 = [f64; 3];
pub type Mat2 = [[f64; 2]; 2];
/// Rank-3 array indexed `[a][b][c]`.
pub type Tensor3 = [[[f64; 2]; 2]; 2];

pub const IDENTITY2: Mat2 = [[1.0, 0.0], [0.0, 1.0]];

pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

pub fn scale(s: f64, a: Vec3) -> Vec3 {
    [s * a[0], s * a[1], s * a[2]]
}

pub fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn det2(m: &Mat2) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

/// Cramer inverse; the caller checks the determinant.
pub fn inv2(m: &Mat2) -> Mat2 {
    let d = det2(m);
    [[m[1][1] / d, -m[0][1] / d], [-m[1][0] / d, m[0][0] / d]]
}

pub fn mul2(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut c = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

pub fn trace2(m: &Mat2) -> f64 {
    m[0][0] + m[1][1]
}

pub fn transpose2(m: &Mat2) -> Mat2 {
    [[m[0][0], m[1][0]], [m[0][1], m[1][1]]]
}

/// Full contraction `a^{ij} b_{ij}`.
pub fn contract2(a: &Mat2, b: &Mat2) -> f64 {
    a[0][0] * b[0][0] + a[0][1] * b[0][1] + a[1][0] * b[1][0] + a[1][1] * b[1][1]
}

/// Eigenvalues of a symmetric 2x2 matrix, ascending.
pub fn sym_eigenvalues2(m: &Mat2) -> [f64; 2] {
    let mean = 0.5 * (m[0][0] + m[1][1]);
    let off = 0.5 * (m[0][1] + m[1][0]);
    let half_gap = (0.25 * (m[0][0] - m[1][1]).powi(2) + off * off).sqrt();
    [mean - half_gap, mean + half_gap]
}

/// Number of monomials `u^a v^b` with `a + b <= 3`.
const JET_LEN: usize = 10;

const fn jet_slot(a: usize, b: usize) -> usize {
    let d = a + b;
    d * (d + 1) / 2 + b
}

/// Truncated bivariate Taylor series to total degree 3.
///
/// Arithmetic on jets propagates exact partial derivatives, which is how chart
/// maps get their closed-form derivatives without hand expansion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    c: [f64; JET_LEN],
}

impl Jet {
    pub fn constant(v: f64) -> Self {
        let mut c = [0.0; JET_LEN];
        c[0] = v;
        Self { c }
    }

    /// The coordinate function `u` (axis 0) or `v` (axis 1) expanded at `value`.
    pub fn variable(axis: usize, value: f64) -> Self {
        let mut j = Self::constant(value);
        j.c[if axis == 0 { jet_slot(1, 0) } else { jet_slot(0, 1) }] = 1.0;
        j
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// Partial derivative `d^{a+b} / du^a dv^b` at the expansion point.
    pub fn partial(&self, a: usize, b: usize) -> f64 {
        const FACT: [f64; 4] = [1.0, 1.0, 2.0, 6.0];
        self.c[jet_slot(a, b)] * FACT[a] * FACT[b]
    }

    fn map_coeffs(self, f: impl Fn(f64) -> f64) -> Self {
        Self { c: self.c.map(f) }
    }

    fn without_constant(self) -> Self {
        let mut d = self;
        d.c[0] = 0.0;
        d
    }

    /// `f(x0) + f'(x0) d + f''(x0) d^2 / 2 + f'''(x0) d^3 / 6` for nilpotent `d`.
    fn compose(self, derivs: [f64; 4]) -> Self {
        let d = self.without_constant();
        let d2 = d * d;
        let d3 = d2 * d;
        Self::constant(derivs[0]) + d * derivs[1] + d2 * (derivs[2] / 2.0) + d3 * (derivs[3] / 6.0)
    }

    pub fn sin(self) -> Self {
        let (s, c) = self.value().sin_cos();
        self.compose([s, c, -s, -c])
    }

    pub fn cos(self) -> Self {
        let (s, c) = self.value().sin_cos();
        self.compose([c, -s, -c, s])
    }

    pub fn recip(self) -> Self {
        let x = self.value();
        self.compose([1.0 / x, -1.0 / (x * x), 2.0 / (x * x * x), -6.0 / (x * x * x * x)])
    }
}

impl std::ops::Add for Jet {
    type Output = Jet;
    fn add(mut self, o: Jet) -> Jet {
        self.c.iter_mut().zip(o.c).for_each(|(a, b)| *a += b);
        self
    }
}

impl std::ops::Sub for Jet {
    type Output = Jet;
    fn sub(mut self, o: Jet) -> Jet {
        self.c.iter_mut().zip(o.c).for_each(|(a, b)| *a -= b);
        self
    }
}

impl std::ops::Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.map_coeffs(|x| -x)
    }
}

impl std::ops::Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, s: f64) -> Jet {
        self.map_coeffs(|x| x * s)
    }
}

impl std::ops::Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, s: f64) -> Jet {
        self.c[0] += s;
        self
    }
}

impl std::ops::Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let mut out = [0.0; JET_LEN];
        for da in 0..=3 {
            for b1 in 0..=da {
                let a1 = da - b1;
                let x = self.c[jet_slot(a1, b1)];
                if x == 0.0 {
                    continue;
                }
                for db in 0..=(3 - da) {
                    for b2 in 0..=db {
                        let a2 = db - b2;
                        out[jet_slot(a1 + a2, b1 + b2)] += x * o.c[jet_slot(a2, b2)];
                    }
                }
            }
        }
        Jet { c: out }
    }
}

impl std::ops::Div for Jet {
    type Output = Jet;
    fn div(self, o: Jet) -> Jet {
        self * o.recip()
    }
}
