//! Reverse-mode automatic differentiation over scalars and 3-vectors.

mod scalar;
mod tape;
mod vec3;

pub use scalar::Scalar;
pub use tape::{gradient, Tape, Var};
pub use vec3::{Mat3, Vec3};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AdError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("square root of negative value {0}")]
    SqrtNegative(f64),
    #[error("fractional power of negative value {0}")]
    PowNegative(f64),
    #[error("variables belong to different tapes")]
    ForeignTape,
}

/// A scalar function that can be evaluated on plain values or on taped
/// variables.
pub trait Differentiable {
    type Error;

    fn eval<S: Scalar>(&self, x: &[S]) -> Result<S, Self::Error>;

    /// Value and gradient at `x`.
    fn value_and_gradient(&self, x: &[f64]) -> Result<(f64, Vec<f64>), Self::Error>
    where
        Self::Error: From<AdError>,
    {
        let tape = Tape::new();
        let xs = tape.vars(x);
        let y = self.eval(&xs)?;
        let g = gradient(y, &xs)?;
        Ok((y.value(), g))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum GradCheckError<E> {
    #[error("evaluation failed: {0}")]
    Eval(E),
    #[error("non-finite value near coordinate {coord}")]
    NonFinite { coord: usize },
}

/// Largest relative disagreement between reverse-mode and central
/// finite-difference gradients: `max_i |g_ad − g_fd| / max(1, |g_fd|)`.
pub fn check_gradient<F>(f: &F, x0: &[f64], h: f64) -> Result<f64, GradCheckError<F::Error>>
where
    F: Differentiable,
    F::Error: From<AdError>,
{
    let (y0, g) = f.value_and_gradient(x0).map_err(GradCheckError::Eval)?;
    compare_gradient(|x: &[f64]| f.eval(x), y0, &g, x0, h)
}

/// [`check_gradient`] for functions whose gradient was computed elsewhere:
/// compares `grad` at `x0` against central differences of `value`.
pub fn compare_gradient<E>(
    value: impl Fn(&[f64]) -> Result<f64, E>,
    y0: f64,
    grad: &[f64],
    x0: &[f64],
    h: f64,
) -> Result<f64, GradCheckError<E>> {
    if !y0.is_finite() {
        return Err(GradCheckError::NonFinite { coord: 0 });
    }
    let mut x = x0.to_vec();
    let mut worst = 0.0f64;
    for i in 0..x0.len() {
        x[i] = x0[i] + h;
        let fp = value(&x).map_err(GradCheckError::Eval)?;
        x[i] = x0[i] - h;
        let fm = value(&x).map_err(GradCheckError::Eval)?;
        x[i] = x0[i];
        if !fp.is_finite() || !fm.is_finite() || !grad[i].is_finite() {
            return Err(GradCheckError::NonFinite { coord: i });
        }
        let fd = (fp - fm) / (2.0 * h);
        worst = worst.max((grad[i] - fd).abs() / fd.abs().max(1.0));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    struct SumSquares;
    impl Differentiable for SumSquares {
        type Error = AdError;
        fn eval<S: Scalar>(&self, x: &[S]) -> Result<S, AdError> {
            Ok(x.iter().skip(1).fold(x[0] * x[0], |acc, &v| acc + v * v))
        }
    }

    struct Hinge(f64);
    impl Differentiable for Hinge {
        type Error = AdError;
        fn eval<S: Scalar>(&self, x: &[S]) -> Result<S, AdError> {
            Ok(x.iter().skip(1).fold((x[0] - self.0).clamp_min(0.0), |acc, &v| {
                acc + (v - self.0).clamp_min(0.0)
            }))
        }
    }

    /// Fixed cubic polynomial used for linearity checks.
    struct Poly {
        coef: [f64; 4],
    }
    impl Differentiable for Poly {
        type Error = AdError;
        fn eval<S: Scalar>(&self, x: &[S]) -> Result<S, AdError> {
            let c = self.coef;
            Ok(x[0] * x[1] * c[0] + x[1] * x[1] * x[2] * c[1] + x[2] * c[2] + x[0] * x[0] * x[0] * c[3])
        }
    }

    #[test]
    fn sum_of_squares_checks() {
        let x = [0.3, -1.2, 2.5, 0.01];
        assert!(check_gradient(&SumSquares, &x, 1e-5).unwrap() < 1e-6);
    }

    #[test]
    fn hinge_far_from_kink_checks() {
        let x = [3.0, 4.0, -2.0, -5.0];
        assert!(check_gradient(&Hinge(1.0), &x, 1e-5).unwrap() < 1e-6);
    }

    #[test]
    fn constant_function_has_zero_gradient() {
        struct Constant;
        impl Differentiable for Constant {
            type Error = AdError;
            fn eval<S: Scalar>(&self, x: &[S]) -> Result<S, AdError> {
                Ok(x[0].lift(4.2))
            }
        }
        let (_, g) = Constant.value_and_gradient(&[1.0, 2.0]).unwrap();
        assert_eq!(g, vec![0.0, 0.0]);
    }

    proptest! {
        #[test]
        fn gradient_is_linear(
            x in proptest::collection::vec(-2.0f64..2.0, 3),
            a in proptest::array::uniform4(-3.0f64..3.0),
            b in proptest::array::uniform4(-3.0f64..3.0),
            alpha in -2.0f64..2.0,
            beta in -2.0f64..2.0,
        ) {
            let combo = Poly { coef: [0, 1, 2, 3].map(|i| alpha * a[i] + beta * b[i]) };
            let (_, gc) = combo.value_and_gradient(&x).unwrap();
            let (_, ga) = Poly { coef: a }.value_and_gradient(&x).unwrap();
            let (_, gb) = Poly { coef: b }.value_and_gradient(&x).unwrap();
            for i in 0..3 {
                prop_assert!((gc[i] - (alpha * ga[i] + beta * gb[i])).abs() < 1e-12 * (1.0 + gc[i].abs()));
            }
        }

        #[test]
        fn gradients_are_deterministic(x in proptest::collection::vec(-2.0f64..2.0, 3)) {
            let p = Poly { coef: [1.0, -2.0, 0.5, 0.25] };
            let (_, g1) = p.value_and_gradient(&x).unwrap();
            let (_, g2) = p.value_and_gradient(&x).unwrap();
            prop_assert_eq!(g1, g2);
        }
    }
}
