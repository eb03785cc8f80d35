/// Adam with bias correction.
#[derive(Clone, Debug)]
pub struct Adam {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    pub fn new(dim: usize, lr: f64, beta1: f64, beta2: f64, eps: f64) -> Self {
        Self { lr, beta1, beta2, eps, m: vec![0.0; dim], v: vec![0.0; dim], t: 0 }
    }

    /// One update of `x` against gradient `g`.
    pub fn step(&mut self, x: &mut [f64], g: &[f64]) {
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t);
        let c2 = 1.0 - self.beta2.powi(self.t);
        for i in 0..x.len() {
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g[i];
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g[i] * g[i];
            let m_hat = self.m[i] / c1;
            let v_hat = self.v[i] / c2;
            x[i] -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_moves_by_lr() {
        let mut a = Adam::new(3, 0.01, 0.9, 0.999, 1e-8);
        let mut x = [1.0, -2.0, 0.0];
        a.step(&mut x, &[5.0, -0.001, 0.0]);
        assert!((x[0] - 0.99).abs() < 1e-9);
        assert!((x[1] + 1.99).abs() < 1e-6);
        assert_eq!(x[2], 0.0);
    }

    /// Hand-computed second step for a single coordinate.
    #[test]
    fn second_step_matches_formula() {
        let mut a = Adam::new(1, 0.1, 0.9, 0.999, 1e-8);
        let mut x = [0.0];
        a.step(&mut x, &[1.0]);
        a.step(&mut x, &[3.0]);
        let m = 0.9 * 0.1 + 0.1 * 3.0;
        let v = 0.999 * 0.001 + 0.001 * 9.0;
        let step2 = 0.1 * (m / (1.0 - 0.81)) / ((v / (1.0 - 0.999f64.powi(2))).sqrt() + 1e-8);
        assert!((x[0] - (-0.1 - step2)).abs() < 1e-8);
    }
}
