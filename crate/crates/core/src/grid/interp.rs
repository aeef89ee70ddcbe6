//! Point interpolation weights.

/// Number of nodes per axis in the Lagrange interpolation stencil.
pub const LAGRANGE_POINTS: usize = 6;

/// Lagrange weights on nodes `0..LAGRANGE_POINTS` at fractional position `t`.
pub fn lagrange_weights(t: f64) -> [f64; LAGRANGE_POINTS] {
    let mut w = [1.0; LAGRANGE_POINTS];
    for (k, wk) in w.iter_mut().enumerate() {
        for m in 0..LAGRANGE_POINTS {
            if m != k {
                *wk *= (t - m as f64) / (k as f64 - m as f64);
            }
        }
    }
    w
}

/// First node of the stencil and the weights for coordinate `x` on a lattice
/// `origin + i h`.
pub fn lagrange_stencil(x: f64, origin: f64, h: f64) -> (isize, [f64; LAGRANGE_POINTS]) {
    let s = (x - origin) / h;
    let base = s.floor() as isize - (LAGRANGE_POINTS as isize / 2 - 1);
    (base, lagrange_weights(s - base as f64))
}

/// Periodic band-limited interpolation kernel for `n` equispaced nodes on a
/// period of `2 pi`, evaluated at offset `t` from a node.
pub fn periodic_sinc(t: f64, n: usize) -> f64 {
    let half = 0.5 * t;
    let s = half.sin();
    if s.abs() < 1e-14 {
        return 1.0;
    }
    let nf = n as f64;
    if n.is_multiple_of(2) {
        (nf * half).sin() / (nf * half.tan())
    } else {
        (nf * half).sin() / (nf * s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lagrange_reproduces_quintics() {
        let f = |x: f64| 1.0 - 2.0 * x + 0.5 * x.powi(3) - 0.1 * x.powi(5);
        let (base, w) = lagrange_stencil(0.37, -1.0, 0.25);
        let got: f64 = w
            .iter()
            .enumerate()
            .map(|(k, wk)| wk * f(-1.0 + 0.25 * (base + k as isize) as f64))
            .sum();
        assert!((got - f(0.37)).abs() < 1e-12);
    }

    #[test]
    fn sinc_interpolates_trig_polynomials() {
        let n = 16;
        let nodes: Vec<f64> = (0..n).map(|k| std::f64::consts::TAU * k as f64 / n as f64).collect();
        let f = |x: f64| 0.3 + x.cos() - 0.2 * (3.0 * x).sin() + 0.05 * (5.0 * x).cos();
        for &x in &[0.1, 1.7, 4.0, 6.2] {
            let got: f64 = nodes.iter().map(|&xk| f(xk) * periodic_sinc(x - xk, n)).sum();
            assert!((got - f(x)).abs() < 1e-13);
        }
        assert!((periodic_sinc(0.0, n) - 1.0).abs() < 1e-15);
        assert!(periodic_sinc(nodes[3], n).abs() < 1e-14);
    }
}
