use alloc::vec;
use alloc::vec::Vec;

/// Explicit Runge-Kutta tableau with a strictly lower triangular stage
/// matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ButcherTableau {
    pub name: &'static str,
    pub nodes: Vec<f64>,
    /// Row `i` holds `a[i][0..i]`.
    pub matrix: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub order: u32,
}

/// rk4hyp stage coefficients `c_i = a_{i,i−1}`, i = 2..6.
pub const RK4HYP_NODES: [f64; 5] = [
    0.16791846623918,
    0.48298439719700,
    0.70546072965982,
    0.09295870406537,
    0.76210081248836,
];

/// rk4hyp weights; `b_5 = 0`.
pub const RK4HYP_WEIGHTS: [f64; 6] = [
    -0.15108370762927,
    0.75384683913851,
    -0.36016595357907,
    0.52696773139913,
    0.0,
    0.23043509067071,
];

impl ButcherTableau {
    /// Classical four-stage, fourth-order method.
    pub fn rk4() -> Self {
        ButcherTableau {
            name: "rk4",
            nodes: vec![0.0, 0.5, 0.5, 1.0],
            matrix: vec![vec![], vec![0.5], vec![0.0, 0.5], vec![0.0, 0.0, 1.0]],
            weights: vec![1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0],
            order: 4,
        }
    }

    /// Five-stage, second-order method with enlarged imaginary-axis
    /// stability interval.
    pub fn rk2hyp() -> Self {
        Self::nested("rk2hyp", &[0.25, 1.0 / 6.0, 0.375, 0.5], &[0.0, 0.0, 0.0, 0.0, 1.0], 2)
    }

    /// Six-stage, fourth-order method optimized for its hyperbolic stability
    /// limit.
    pub fn rk4hyp() -> Self {
        Self::nested("rk4hyp", &RK4HYP_NODES, &RK4HYP_WEIGHTS, 4)
    }

    /// Low-storage form: stage `i` only uses stage `i − 1`, with
    /// `a_{i,i−1} = c_i`.
    fn nested(name: &'static str, sub: &[f64], weights: &[f64], order: u32) -> Self {
        let s = sub.len() + 1;
        let mut nodes = vec![0.0];
        nodes.extend_from_slice(sub);
        let matrix = (0..s)
            .map(|i| {
                let mut row = vec![0.0; i];
                if i > 0 {
                    row[i - 1] = sub[i - 1];
                }
                row
            })
            .collect();
        ButcherTableau {
            name,
            nodes,
            matrix,
            weights: weights.to_vec(),
            order,
        }
    }

    pub fn stages(&self) -> usize {
        self.weights.len()
    }

    pub fn a(&self, i: usize, j: usize) -> f64 {
        if j < i {
            self.matrix[i][j]
        } else {
            0.0
        }
    }

    /// Only subdiagonal entries are nonzero.
    pub fn is_nested(&self) -> bool {
        self.matrix
            .iter()
            .enumerate()
            .all(|(i, row)| row.iter().enumerate().all(|(j, &a)| j + 1 == i || a == 0.0))
    }

    /// Σ b_i c_i^k.
    pub fn moment(&self, k: i32) -> f64 {
        self.weights
            .iter()
            .zip(&self.nodes)
            .map(|(b, c)| b * powi(*c, k))
            .sum()
    }

    /// Σ_i b_i Σ_j a_ij c_j.
    pub fn nested_moment(&self) -> f64 {
        (0..self.stages())
            .map(|i| self.weights[i] * (0..i).map(|j| self.a(i, j) * self.nodes[j]).sum::<f64>())
            .sum()
    }

    /// Stability polynomial R(z) for `ẋ = λx`, `z = λΔt`, evaluated by
    /// running the stages.
    pub fn amplification(&self, z: nalgebra::Complex<f64>) -> nalgebra::Complex<f64> {
        let one = nalgebra::Complex::new(1.0, 0.0);
        let mut k: Vec<nalgebra::Complex<f64>> = Vec::with_capacity(self.stages());
        for i in 0..self.stages() {
            let mut stage = one;
            for (j, kj) in k.iter().enumerate() {
                stage += *kj * self.a(i, j);
            }
            k.push(z * stage);
        }
        let mut r = one;
        for (b, kj) in self.weights.iter().zip(&k) {
            r += *kj * *b;
        }
        r
    }
}

fn powi(x: f64, k: i32) -> f64 {
    let mut r = 1.0;
    for _ in 0..k {
        r *= x;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Complex;

    #[test]
    fn printed_rk2hyp_coefficients() {
        let t = ButcherTableau::rk2hyp();
        assert_eq!(t.nodes, vec![0.0, 0.25, 1.0 / 6.0, 0.375, 0.5]);
        assert_eq!(t.weights, vec![0.0, 0.0, 0.0, 0.0, 1.0]);
        for i in 1..5 {
            assert_eq!(t.a(i, i - 1), t.nodes[i]);
        }
        assert!(t.is_nested());
    }

    #[test]
    fn rk4hyp_table_values() {
        let t = ButcherTableau::rk4hyp();
        assert_eq!(t.a(1, 0), 0.16791846623918);
        assert_eq!(t.nodes[1], 0.16791846623918);
        assert_eq!(t.weights[0], -0.15108370762927);
        assert_eq!(t.weights[4], 0.0);
        assert_eq!(t.stages(), 6);
        assert!(t.is_nested());
    }

    #[test]
    fn order_conditions() {
        for t in [ButcherTableau::rk2hyp(), ButcherTableau::rk4hyp(), ButcherTableau::rk4()] {
            assert!((t.moment(0) - 1.0).abs() < 1e-12, "{}", t.name);
        }
        for t in [ButcherTableau::rk2hyp(), ButcherTableau::rk4()] {
            assert!((t.moment(1) - 0.5).abs() < 1e-12, "{}", t.name);
        }
        // the 14-digit rk4hyp coefficients only meet the higher conditions
        // to about 1e-7
        let hyp = ButcherTableau::rk4hyp();
        assert!((hyp.moment(1) - 0.5).abs() < 1e-7);
        let rk4 = ButcherTableau::rk4();
        assert!((rk4.moment(2) - 1.0 / 3.0).abs() < 1e-10);
        assert!((rk4.nested_moment() - 1.0 / 6.0).abs() < 1e-10);
        assert!((hyp.moment(2) - 1.0 / 3.0).abs() < 1e-7);
        assert!((hyp.nested_moment() - 1.0 / 6.0).abs() < 1e-7);
    }

    #[test]
    fn rk4_amplification_is_taylor_polynomial() {
        let t = ButcherTableau::rk4();
        for &z in &[Complex::new(-0.3, 0.0), Complex::new(0.1, 1.2), Complex::new(-2.0, 0.5)] {
            let expected = Complex::new(1.0, 0.0) + z + z * z / 2.0 + z * z * z / 6.0 + z * z * z * z / 24.0;
            assert!((t.amplification(z) - expected).norm_sqr() < 1e-28);
        }
    }
}
