//! Minimal complex linear algebra on the fixed four-dimensional state space.
//!
//! The Hilbert space here is permanently 4-dimensional (two spins-1/2), so a
//! stack-allocated 4×4 type with hand-written products is simpler and faster
//! than a general matrix library, and keeps the numerical path fully
//! deterministic (no BLAS dispatch, no allocation).

use num_complex::Complex64;

pub type C64 = Complex64;

/// State amplitudes in the basis order |00⟩, |01⟩, |10⟩, |11⟩.
pub type Vec4 = [C64; 4];

pub const ZERO_VEC4: Vec4 = [C64::new(0.0, 0.0); 4];

/// Squared Euclidean norm Σ|cᵢ|².
pub fn vec_norm2(v: &Vec4) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum()
}

/// Euclidean norm.
pub fn vec_norm(v: &Vec4) -> f64 {
    vec_norm2(v).sqrt()
}

/// Euclidean distance between two amplitude vectors.
pub fn vec_distance(a: &Vec4, b: &Vec4) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// a + s·b, elementwise.
pub fn vec_add_scaled(a: &Vec4, s: C64, b: &Vec4) -> Vec4 {
    let mut out = *a;
    for i in 0..4 {
        out[i] += s * b[i];
    }
    out
}

/// Dense 4×4 complex matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat4(pub [[C64; 4]; 4]);

impl Mat4 {
    pub fn zeros() -> Self {
        Mat4([[C64::new(0.0, 0.0); 4]; 4])
    }

    pub fn identity() -> Self {
        let mut m = Self::zeros();
        for i in 0..4 {
            m.0[i][i] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn mul_vec(&self, v: &Vec4) -> Vec4 {
        let mut out = ZERO_VEC4;
        for (i, row) in self.0.iter().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for (a, x) in row.iter().zip(v.iter()) {
                acc += a * x;
            }
            out[i] = acc;
        }
        out
    }

    pub fn mul_mat(&self, other: &Mat4) -> Mat4 {
        let mut out = Self::zeros();
        for i in 0..4 {
            for k in 0..4 {
                let a = self.0[i][k];
                if a != C64::new(0.0, 0.0) {
                    for j in 0..4 {
                        out.0[i][j] += a * other.0[k][j];
                    }
                }
            }
        }
        out
    }

    pub fn scale(&self, s: C64) -> Mat4 {
        let mut out = *self;
        for row in out.0.iter_mut() {
            for a in row.iter_mut() {
                *a *= s;
            }
        }
        out
    }

    pub fn add(&self, other: &Mat4) -> Mat4 {
        let mut out = *self;
        for i in 0..4 {
            for j in 0..4 {
                out.0[i][j] += other.0[i][j];
            }
        }
        out
    }

    pub fn adjoint(&self) -> Mat4 {
        let mut out = Self::zeros();
        for i in 0..4 {
            for j in 0..4 {
                out.0[i][j] = self.0[j][i].conj();
            }
        }
        out
    }

    /// Largest entry magnitude; cheap norm bound for Hermiticity checks.
    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    /// Infinity norm (max absolute row sum); used to pick the expm scaling.
    pub fn norm_inf(&self) -> f64 {
        self.0
            .iter()
            .map(|row| row.iter().map(|c| c.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Matrix exponential by scaling-and-squaring with a Taylor series.
    ///
    /// The integrators call this on anti-Hermitian matrices −i·H·Δt with
    /// ‖·‖ ≲ 1e-3, where the series converges in a handful of terms; the
    /// scaling step keeps it correct for any argument (tests exercise norms
    /// of order 1–10). Terms are added until they fall below 1e-20 relative
    /// to unity, i.e. to double-precision roundoff.
    pub fn expm(&self) -> Mat4 {
        let norm = self.norm_inf();
        let squarings = if norm > 0.25 {
            (norm / 0.25).log2().ceil() as u32
        } else {
            0
        };
        let scaled = self.scale(C64::new((0.5f64).powi(squarings as i32), 0.0));

        let mut result = Mat4::identity();
        let mut term = Mat4::identity();
        for k in 1..=40 {
            term = term.mul_mat(&scaled).scale(C64::new(1.0 / k as f64, 0.0));
            result = result.add(&term);
            if term.max_abs() < 1e-20 {
                break;
            }
        }

        for _ in 0..squarings {
            result = result.mul_mat(&result);
        }
        result
    }
}
