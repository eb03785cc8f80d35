use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use super::tape::Var;
use super::AdError;

/// Arithmetic shared by plain `f64` and taped [`Var`] values, so kinematics,
/// atoms and compiled programs are written once and run either as fast
/// value-only code or as differentiable code.
pub trait Scalar:
    Copy
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
{
    fn value(self) -> f64;
    /// A constant living in the same evaluation context as `self`.
    fn lift(self, c: f64) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn sqrt(self) -> Result<Self, AdError>;
    fn div(self, rhs: Self) -> Result<Self, AdError>;
    fn abs(self) -> Self;
    fn max(self, rhs: Self) -> Self;
    fn min(self, rhs: Self) -> Self;
    fn clamp_min(self, lo: f64) -> Self;
    fn powf(self, p: f64) -> Result<Self, AdError>;
    fn norm3(x: Self, y: Self, z: Self) -> Self;
    /// `offset + Σ coef·v`; `ctx` supplies the context when `terms` is empty.
    fn linear_combination(ctx: Self, terms: &[(Self, f64)], offset: f64) -> Self;

    fn zero_like(self) -> Self {
        self.lift(0.0)
    }

    fn recip_checked(self) -> Result<Self, AdError> {
        self.lift(1.0).div(self)
    }
}

impl Scalar for f64 {
    fn value(self) -> f64 {
        self
    }
    fn lift(self, c: f64) -> Self {
        c
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn sqrt(self) -> Result<Self, AdError> {
        if self < 0.0 {
            Err(AdError::SqrtNegative(self))
        } else {
            Ok(f64::sqrt(self))
        }
    }
    fn div(self, rhs: Self) -> Result<Self, AdError> {
        if rhs == 0.0 {
            Err(AdError::DivisionByZero)
        } else {
            Ok(self / rhs)
        }
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
    fn max(self, rhs: Self) -> Self {
        if self >= rhs {
            self
        } else {
            rhs
        }
    }
    fn min(self, rhs: Self) -> Self {
        if self <= rhs {
            self
        } else {
            rhs
        }
    }
    fn clamp_min(self, lo: f64) -> Self {
        if self > lo {
            self
        } else {
            lo
        }
    }
    fn powf(self, p: f64) -> Result<Self, AdError> {
        if self < 0.0 {
            Err(AdError::PowNegative(self))
        } else {
            Ok(f64::powf(self, p))
        }
    }
    fn norm3(x: Self, y: Self, z: Self) -> Self {
        (x * x + y * y + z * z).sqrt()
    }
    fn linear_combination(_ctx: Self, terms: &[(Self, f64)], offset: f64) -> Self {
        terms.iter().fold(offset, |acc, (v, c)| acc + v * c)
    }
}

impl<'t> Scalar for Var<'t> {
    fn value(self) -> f64 {
        Var::value(&self)
    }
    fn lift(self, c: f64) -> Self {
        self.tape().constant(c)
    }
    fn sin(self) -> Self {
        Var::sin(self)
    }
    fn cos(self) -> Self {
        Var::cos(self)
    }
    fn sqrt(self) -> Result<Self, AdError> {
        Var::sqrt(self)
    }
    fn div(self, rhs: Self) -> Result<Self, AdError> {
        Var::div(self, rhs)
    }
    fn abs(self) -> Self {
        Var::abs(self)
    }
    fn max(self, rhs: Self) -> Self {
        Var::max(self, rhs)
    }
    fn min(self, rhs: Self) -> Self {
        Var::min(self, rhs)
    }
    fn clamp_min(self, lo: f64) -> Self {
        Var::clamp_min(self, lo)
    }
    fn powf(self, p: f64) -> Result<Self, AdError> {
        Var::powf(self, p)
    }
    fn norm3(x: Self, y: Self, z: Self) -> Self {
        Var::norm3(x, y, z)
    }
    fn linear_combination(ctx: Self, terms: &[(Self, f64)], offset: f64) -> Self {
        ctx.tape().linear_combination(terms, offset)
    }
}
