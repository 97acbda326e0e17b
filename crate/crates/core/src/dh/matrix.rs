use std::ops::Mul;

use crate::Real;

/// Homogeneous point (`w = 1`) or free vector (`w = 0`).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec4<T> {
    pub x: T,
    pub y: T,
    pub z: T,
    pub w: T,
}

impl<T: Real> Vec4<T> {
    pub fn point(x: T, y: T, z: T) -> Self {
        Vec4 { x, y, z, w: T::one() }
    }

    pub fn direction(x: T, y: T, z: T) -> Self {
        Vec4 { x, y, z, w: T::zero() }
    }

    pub fn origin() -> Self {
        Self::point(T::zero(), T::zero(), T::zero())
    }

    pub fn to_array(self) -> [T; 4] {
        [self.x, self.y, self.z, self.w]
    }

    pub fn max_abs_diff(self, other: Self) -> T {
        self.to_array()
            .iter()
            .zip(other.to_array())
            .fold(T::zero(), |m, (a, b)| m.max((*a - b).abs()))
    }
}

/// Row-major 4×4 homogeneous transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hmat<T> {
    m: [[T; 4]; 4],
}

impl<T: Real> Hmat<T> {
    pub fn identity() -> Self {
        let (o, z) = (T::one(), T::zero());
        Hmat {
            m: [[o, z, z, z], [z, o, z, z], [z, z, o, z], [z, z, z, o]],
        }
    }

    /// Builds from the top three rows; the bottom row is fixed to `(0, 0, 0, 1)`.
    pub fn from_rows(top: [[T; 4]; 3]) -> Self {
        let (o, z) = (T::one(), T::zero());
        Hmat {
            m: [top[0], top[1], top[2], [z, z, z, o]],
        }
    }

    pub fn from_array(m: [[T; 4]; 4]) -> Self {
        Hmat { m }
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        self.m[r][c]
    }

    pub fn rows(&self) -> &[[T; 4]; 4] {
        &self.m
    }

    pub fn translation(x: T, y: T, z: T) -> Self {
        let mut h = Self::identity();
        h.m[0][3] = x;
        h.m[1][3] = y;
        h.m[2][3] = z;
        h
    }

    pub fn rot_x(angle: T) -> Self {
        let (s, c) = angle.sin_cos();
        let mut h = Self::identity();
        h.m[1][1] = c;
        h.m[1][2] = -s;
        h.m[2][1] = s;
        h.m[2][2] = c;
        h
    }

    pub fn rot_z(angle: T) -> Self {
        let (s, c) = angle.sin_cos();
        let mut h = Self::identity();
        h.m[0][0] = c;
        h.m[0][1] = -s;
        h.m[1][0] = s;
        h.m[1][1] = c;
        h
    }

    pub fn apply(&self, p: Vec4<T>) -> Vec4<T> {
        let v = p.to_array();
        let row = |r: usize| (0..4).fold(T::zero(), |acc, c| acc + self.m[r][c] * v[c]);
        Vec4 {
            x: row(0),
            y: row(1),
            z: row(2),
            w: row(3),
        }
    }

    /// Column `c` as a vector, e.g. `column(3)` is the position `p`.
    pub fn column(&self, c: usize) -> Vec4<T> {
        Vec4 {
            x: self.m[0][c],
            y: self.m[1][c],
            z: self.m[2][c],
            w: self.m[3][c],
        }
    }

    pub fn position(&self) -> Vec4<T> {
        self.column(3)
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        let mut worst = T::zero();
        for r in 0..4 {
            for c in 0..4 {
                worst = worst.max((self.m[r][c] - other.m[r][c]).abs());
            }
        }
        worst
    }

    /// `max |RᵀR − I|` over the rotation block.
    pub fn orthonormality_error(&self) -> T {
        let mut worst = T::zero();
        for i in 0..3 {
            for j in 0..3 {
                let dot = (0..3).fold(T::zero(), |acc, k| acc + self.m[k][i] * self.m[k][j]);
                let target = if i == j { T::one() } else { T::zero() };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }

    pub fn rotation_det(&self) -> T {
        let m = &self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    pub fn has_affine_bottom_row(&self) -> bool {
        self.m[3] == [T::zero(), T::zero(), T::zero(), T::one()]
    }

    pub fn map<U: Real>(&self, f: impl Fn(T) -> U) -> Hmat<U> {
        Hmat {
            m: self.m.map(|row| row.map(&f)),
        }
    }
}

impl<T: Real> Mul for Hmat<T> {
    type Output = Hmat<T>;

    fn mul(self, rhs: Hmat<T>) -> Hmat<T> {
        let mut out = [[T::zero(); 4]; 4];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, cell) in row.iter_mut().enumerate() {
                *cell = (0..4).fold(T::zero(), |acc, k| acc + self.m[r][k] * rhs.m[k][c]);
            }
        }
        Hmat { m: out }
    }
}

impl<T: Real> Mul<Vec4<T>> for Hmat<T> {
    type Output = Vec4<T>;

    fn mul(self, rhs: Vec4<T>) -> Vec4<T> {
        self.apply(rhs)
    }
}
