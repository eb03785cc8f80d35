use std::ops::{Add, Neg, Sub};

use super::{AdError, Scalar};

/// Small 3-vector over any [`Scalar`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Vec3<S> {
    pub x: S,
    pub y: S,
    pub z: S,
}

impl<S: Scalar> Vec3<S> {
    pub fn new(x: S, y: S, z: S) -> Self {
        Self { x, y, z }
    }

    /// Constant vector in the context of `ctx`.
    pub fn lift(ctx: S, v: [f64; 3]) -> Self {
        Self::new(ctx.lift(v[0]), ctx.lift(v[1]), ctx.lift(v[2]))
    }

    pub fn value(&self) -> [f64; 3] {
        [self.x.value(), self.y.value(), self.z.value()]
    }

    pub fn get(&self, axis: usize) -> S {
        match axis {
            0 => self.x,
            1 => self.y,
            2 => self.z,
            _ => panic!("axis {axis} out of range"),
        }
    }

    pub fn scale(self, s: S) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }

    pub fn scale_f(self, s: f64) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }

    pub fn dot(self, o: Self) -> S {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn dot_f(self, o: [f64; 3]) -> S {
        self.x * o[0] + self.y * o[1] + self.z * o[2]
    }

    pub fn cross(self, o: Self) -> Self {
        Self::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(self) -> S {
        S::norm3(self.x, self.y, self.z)
    }

    pub fn norm_squared(self) -> S {
        self.dot(self)
    }

    pub fn div(self, s: S) -> Result<Self, AdError> {
        let inv = s.recip_checked()?;
        Ok(self.scale(inv))
    }

    pub fn normalized(self) -> Result<Self, AdError> {
        self.div(self.norm())
    }

    pub fn add_f(self, o: [f64; 3]) -> Self {
        Self::new(self.x + o[0], self.y + o[1], self.z + o[2])
    }

    /// Ground projection (y dropped).
    pub fn xz(self) -> [S; 2] {
        [self.x, self.z]
    }
}

impl<S: Scalar> Add for Vec3<S> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<S: Scalar> Sub for Vec3<S> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<S: Scalar> Neg for Vec3<S> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

impl From<[f64; 3]> for Vec3<f64> {
    fn from(v: [f64; 3]) -> Self {
        Self::new(v[0], v[1], v[2])
    }
}

/// 3×3 matrix, row-major.
#[derive(Clone, Copy, Debug)]
pub struct Mat3<S> {
    pub m: [[S; 3]; 3],
}

impl<S: Scalar> Mat3<S> {
    pub fn identity(ctx: S) -> Self {
        let o = ctx.lift(0.0);
        let i = ctx.lift(1.0);
        Self { m: [[i, o, o], [o, i, o], [o, o, i]] }
    }

    pub fn mul(&self, b: &Self) -> Self {
        let a = &self.m;
        let b = &b.m;
        let e = |r: usize, c: usize| a[r][0] * b[0][c] + a[r][1] * b[1][c] + a[r][2] * b[2][c];
        Self { m: [[e(0, 0), e(0, 1), e(0, 2)], [e(1, 0), e(1, 1), e(1, 2)], [e(2, 0), e(2, 1), e(2, 2)]] }
    }

    pub fn apply(&self, v: Vec3<S>) -> Vec3<S> {
        let a = &self.m;
        Vec3::new(
            a[0][0] * v.x + a[0][1] * v.y + a[0][2] * v.z,
            a[1][0] * v.x + a[1][1] * v.y + a[1][2] * v.z,
            a[2][0] * v.x + a[2][1] * v.y + a[2][2] * v.z,
        )
    }

    /// Product with a constant vector.
    pub fn apply_f(&self, v: [f64; 3]) -> Vec3<S> {
        let a = &self.m;
        Vec3::new(
            a[0][0] * v[0] + a[0][1] * v[1] + a[0][2] * v[2],
            a[1][0] * v[0] + a[1][1] * v[1] + a[1][2] * v[2],
            a[2][0] * v[0] + a[2][1] * v[1] + a[2][2] * v[2],
        )
    }

    pub fn value(&self) -> [[f64; 3]; 3] {
        let mut out = [[0.0; 3]; 3];
        for (r, row) in self.m.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                out[r][c] = v.value();
            }
        }
        out
    }
}
