//! Closed-form expansions of the three-sphere fields, their brackets and the
//! bracket determinant, to first order in the sphere radius `a` and through
//! `a / y^4` in the inverse wall distance.
//!
//! Bracket values here follow the convention `[F, G] = (G . grad) F - (F . grad) G`,
//! the opposite of [`crate::liealg::lie_bracket`]. First-order words therefore
//! differ in sign from the library convention while second-order words agree;
//! [`SeriesBracketSample::to_library_convention`] converts.
//!
//! Two corrections are applied to the printed bracket formulas, both checked
//! against finite-difference brackets of the numeric fields: the `1/y^4` terms
//! of the third component of `[F1,[F1,F2]]`-type words are linear in `a` (a
//! stray extra factor `a` is dropped), and the fourth component of
//! `[F2,[F1,F2]]` carries the opposite overall sign.

use nalgebra::{Matrix2, Matrix3, Vector3, Vector5};
use serde::Serialize;

use crate::error::{Error, Result};

/// Orders retained by a truncated expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Truncation {
    /// Highest power of `a` kept.
    pub a_power: u32,
    /// Highest power of `1/y` kept.
    pub inv_y_power: u32,
}

pub const FIELD_TRUNCATION: Truncation = Truncation { a_power: 1, inv_y_power: 4 };

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesFieldSample {
    /// Pose components 3..5 split by order: `[1, a, a/y^2, a/y^3, a/y^4]`.
    pub terms: [Vector3<f64>; 5],
    pub shape: [f64; 2],
    pub truncation: Truncation,
}

impl SeriesFieldSample {
    pub fn pose(&self) -> Vector3<f64> {
        self.terms.iter().sum()
    }

    /// Full five-component field value.
    pub fn value(&self) -> Vector5<f64> {
        let p = self.pose();
        Vector5::new(self.shape[0], self.shape[1], p[0], p[1], p[2])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesBracketSample {
    /// Pose components of `[F1, F2]`.
    pub f1f2: Vector3<f64>,
    /// Pose components of `[F1, [F1, F2]]`.
    pub f1_f1f2: Vector3<f64>,
    /// Pose components of `[F2, [F1, F2]]`.
    pub f2_f1f2: Vector3<f64>,
    pub truncation: Truncation,
}

impl SeriesBracketSample {
    /// Same words in the `(F . grad) G - (G . grad) F` convention.
    pub fn to_library_convention(&self) -> Self {
        Self { f1f2: -self.f1f2, ..self.clone() }
    }

    /// Columns `[F1,F2]`, `[F1,[F1,F2]]`, `[F2,[F1,F2]]`.
    pub fn minor(&self) -> Matrix3<f64> {
        Matrix3::from_columns(&[self.f1f2, self.f1_f1f2, self.f2_f1f2])
    }

    pub fn full(v: &Vector3<f64>) -> Vector5<f64> {
        Vector5::new(0.0, 0.0, v[0], v[1], v[2])
    }
}

fn q(x1: f64, x2: f64) -> f64 {
    x2 * x2 + x1 * x2 + x1 * x1
}

fn check(x1: f64, x2: f64, y: f64) -> Result<()> {
    if !(x1 > 0.0 && x2 > 0.0 && y > 0.0) {
        return Err(Error::Argument(format!("series needs xi1, xi2, y > 0, got ({x1}, {x2}, {y})")));
    }
    if x1 + x2 == 0.0 || q(x1, x2) == 0.0 {
        return Err(Error::Argument("degenerate arm lengths".into()));
    }
    Ok(())
}

pub fn k1_3(x1: f64, x2: f64, _t: f64) -> f64 {
    (x2 * x2 * x1 * x1 - x2.powi(3) * x1 - x2.powi(4) + 2.0 * x1.powi(3) * x2 + 2.0 * x1.powi(4))
        / (q(x1, x2) * x1 * x2 * (x1 + x2))
}

pub fn k2_3(x1: f64, x2: f64, t: f64) -> f64 {
    let c = t.cos();
    let c2 = c * c;
    let c4 = c2 * c2;
    -210.0 * x1 * x1 * c2 + 12.0 * c4 * x1 * x1 + 184.0 * x1 * x1 + 24.0 * c2 * x1 * x2 - 32.0 * x1 * x2
        - 6.0 * c4 * x1 * x2
        - 92.0 * x2 * x2
        + 105.0 * x2 * x2 * c2
        - 6.0 * c4 * x2 * x2
}

pub fn k3_3(x1: f64, x2: f64, t: f64) -> f64 {
    let c = t.cos();
    let c2 = c * c;
    let c4 = c2 * c2;
    let p = |a: f64, n: i32| a.powi(n);
    (12.0 * c4 * p(x2, 5) + 24.0 * p(x1, 5) * c4 - 168.0 * p(x2, 5) * c2 - 336.0 * p(x1, 5) * c2 + 112.0 * p(x2, 5)
        + 72.0 * x1 * p(x2, 4)
        - 176.0 * p(x1, 2) * p(x2, 3)
        - 136.0 * p(x1, 3) * p(x2, 2)
        + 224.0 * p(x1, 5)
        - 156.0 * p(x1, 3) * p(x2, 2) * c2
        - 24.0 * p(x1, 2) * p(x2, 3) * c2
        - 240.0 * p(x1, 4) * x2 * c2
        + 48.0 * p(x1, 4) * x2
        - 156.0 * x1 * p(x2, 4) * c2
        - 24.0 * c4 * p(x1, 2) * p(x2, 3)
        + 9.0 * c4 * x1 * p(x2, 4)
        - 21.0 * p(x1, 3) * c4 * p(x2, 2))
        / q(x1, x2)
}

pub fn k1_4(x1: f64, x2: f64, t: f64) -> f64 {
    k1_3(x1, x2, t)
}

pub fn k2_4(x1: f64, x2: f64, t: f64) -> f64 {
    let c2 = t.cos().powi(2);
    6.0 * c2 * x1 + 3.0 * c2 * x2 - 4.0 * x1 - 2.0 * x2
}

pub fn k3_4(x1: f64, x2: f64, t: f64) -> f64 {
    let c2 = t.cos().powi(2);
    let c4 = c2 * c2;
    -132.0 * x1 * x1 * c2 + 6.0 * c4 * x1 * x1 + 56.0 * x1 * x1 + 12.0 * c2 * x1 * x2 - 16.0 * x1 * x2
        - 3.0 * c4 * x1 * x2
        - 28.0 * x2 * x2
        + 66.0 * x2 * x2 * c2
        - 3.0 * c4 * x2 * x2
}

pub fn k4_4(x1: f64, x2: f64, t: f64) -> f64 {
    let c2 = t.cos().powi(2);
    let c4 = c2 * c2;
    let c6 = c4 * c2;
    let p = |a: f64, n: i32| a.powi(n);
    (-210.0 * c4 * p(x2, 5) - 420.0 * p(x1, 5) * c4 + 232.0 * p(x2, 5) * c2 + 24.0 * c6 * p(x1, 5) - 64.0 * p(x2, 5)
        + 12.0 * c6 * p(x2, 5)
        - 96.0 * x1 * p(x2, 4)
        - 64.0 * p(x1, 2) * p(x2, 3)
        - 128.0 * p(x1, 5)
        + 104.0 * p(x1, 3) * p(x2, 2) * c2
        - 56.0 * p(x1, 2) * p(x2, 3) * c2
        - 96.0 * p(x1, 4) * x2
        + 216.0 * x1 * p(x2, 4) * c2
        - 66.0 * c4 * p(x1, 2) * p(x2, 3)
        - 318.0 * p(x1, 4) * c4 * x2
        - 240.0 * p(x1, 3) * c4 * p(x2, 2)
        - 24.0 * c6 * p(x1, 2) * p(x2, 3)
        - 21.0 * c6 * p(x1, 3) * p(x2, 2)
        + 464.0 * p(x1, 5) * c2
        - 128.0 * p(x1, 3) * p(x2, 2)
        + 264.0 * p(x1, 4) * x2 * c2
        - 204.0 * c4 * x1 * p(x2, 4)
        + 9.0 * c6 * x1 * p(x2, 4))
        / (512.0 * x2 * x2 + 512.0 * x1 * x2 + 512.0 * x1 * x1)
}

pub fn k1_5(x1: f64, x2: f64, t: f64) -> f64 {
    let c2 = t.cos().powi(2);
    -8.0 * x1 - 4.0 * x2 + 2.0 * c2 * x1 + c2 * x2
}

pub fn k2_5(x1: f64, x2: f64, t: f64) -> f64 {
    let c2 = t.cos().powi(2);
    let c4 = c2 * c2;
    let p = |a: f64, n: i32| a.powi(n);
    (20.0 * c2 * p(x2, 4) - 40.0 * c2 * p(x1, 4) - 4.0 * c4 * p(x2, 4) + 8.0 * p(x1, 4) * c4 - 40.0 * p(x2, 3) * x1
        - 8.0 * p(x2, 2) * p(x1, 2)
        + 32.0 * p(x1, 3) * x2
        - 16.0 * p(x2, 4)
        + 32.0 * p(x2, 3) * c2 * x1
        - 7.0 * c4 * p(x2, 3) * x1
        + c4 * p(x1, 2) * p(x2, 2)
        - 40.0 * c2 * p(x1, 3) * x2
        + 8.0 * p(x1, 3) * c4 * x2
        + 32.0 * p(x1, 4)
        - 8.0 * p(x2, 2) * p(x1, 2) * c2)
        / q(x1, x2)
}

fn trig8(t: f64) -> f64 {
    let c2 = t.cos().powi(2);
    8.0 - 4.0 * c2 + c2 * c2
}

pub fn l3(x1: f64, x2: f64, t: f64) -> f64 {
    x2.powi(3) * trig8(t) * (2.0 * x1 * x1 - x1 * x2 - x2 * x2) / q(x1, x2).powi(2)
}

pub fn l4(x1: f64, x2: f64, t: f64) -> f64 {
    x2.powi(3) * trig8(t) * (2.0 * x1 + x2) / q(x1, x2).powi(2)
}

/// Shape-angle factor of the leading determinant coefficient.
pub fn r_factor(x1: f64, x2: f64, t: f64) -> f64 {
    let p = |a: f64, n: i32| a.powi(n);
    let c2 = t.cos().powi(2);
    let poly = 6.0 * p(x1, 6) + 27.0 * p(x1, 5) * x2 + 50.0 * p(x1, 4) * p(x2, 2) + 55.0 * p(x1, 3) * p(x2, 3)
        + 50.0 * p(x1, 2) * p(x2, 4)
        + 27.0 * x1 * p(x2, 5)
        + 6.0 * p(x2, 6);
    let trig = 64.0 - 64.0 * c2 + 32.0 * c2 * c2 - 8.0 * c2.powi(3) + c2.powi(4);
    poly / ((x1 + x2) * q(x1, x2) * x1 * x2) * trig
}

/// Shape factor of the `theta = 0` subdeterminant.
pub fn r_prime(x1: f64, x2: f64) -> f64 {
    let p = |a: f64, n: i32| a.powi(n);
    (2.0 * p(x2, 5) + 11.0 * x1 * p(x2, 4) + 16.0 * p(x1, 2) * p(x2, 3) + 19.0 * p(x1, 3) * p(x2, 2)
        + 12.0 * p(x1, 4) * x2
        + 3.0 * p(x1, 5))
        / ((x1 + x2).powi(2) * x2 * x2 * q(x1, x2).powi(2))
}

/// Equal-arm determinant coefficient of `1/y^10`.
pub fn t_coefficient(xi: f64, t: f64, a: f64) -> f64 {
    let (s, c) = t.sin_cos();
    -945.0 / 524288.0 * a.powi(3) * (s * c).powi(2) * xi * trig8(t).powi(2)
}

/// Generic determinant coefficient of `1/y^9`.
pub fn det_coefficient(x1: f64, x2: f64, t: f64, a: f64) -> f64 {
    let (s, c) = t.sin_cos();
    81.0 * a.powi(3) * (x1 - x2) / 131072.0 * s * c * c * r_factor(x1, x2, t)
}

/// Coefficient of `1/y^4` in the `theta = 0` subdeterminant.
pub fn delta_coefficient(x1: f64, x2: f64, a: f64) -> f64 {
    45.0 / 512.0 * a * a * (x1 - x2) * x1 * r_prime(x1, x2)
}

/// Series values of both fields at `(xi1, xi2, y, theta)`.
pub fn series_fields(x1: f64, x2: f64, y: f64, t: f64, a: f64) -> Result<[SeriesFieldSample; 2]> {
    check(x1, x2, y)?;
    let (s, c) = t.sin_cos();
    let (y2, y3, y4) = (y * y, y.powi(3), y.powi(4));
    let f1 = [
        Vector3::new(c / 3.0, s / 3.0, 0.0),
        Vector3::new(a / 6.0 * c * k1_3(x1, x2, t), a / 6.0 * s * k1_4(x1, x2, t), 0.0),
        Vector3::new(3.0 * a / (16.0 * y2) * s * c * (x2 + 2.0 * x1), -3.0 * a / (32.0 * y2) * k2_4(x1, x2, t), 0.0),
        Vector3::new(
            a / (384.0 * y3) * c * k2_3(x1, x2, t),
            a / (192.0 * y3) * s * k3_4(x1, x2, t),
            3.0 * a / (64.0 * y3) * s * c * k1_5(x1, x2, t),
        ),
        Vector3::new(
            a / (512.0 * y4) * s * c * k3_3(x1, x2, t),
            -a / y4 * k4_4(x1, x2, t),
            -9.0 * a / (512.0 * y4) * c * k2_5(x1, x2, t),
        ),
    ];
    let f2 = [
        Vector3::new(-c / 3.0, -s / 3.0, 0.0),
        Vector3::new(-a / 6.0 * c * k1_3(x2, x1, -t), -a / 6.0 * s * k1_4(x2, x1, -t), 0.0),
        Vector3::new(3.0 * a / (16.0 * y2) * s * c * (2.0 * x2 + x1), -3.0 * a / (32.0 * y2) * k2_4(x2, x1, t), 0.0),
        Vector3::new(
            -a / (384.0 * y3) * c * k2_3(x2, x1, -t),
            -a / (192.0 * y3) * s * k3_4(x2, x1, -t),
            3.0 * a / (64.0 * y3) * s * c * k1_5(x2, x1, -t),
        ),
        Vector3::new(
            a / (512.0 * y4) * s * c * k3_3(x2, x1, -t),
            -a / y4 * k4_4(x2, x1, -t),
            9.0 * a / (512.0 * y4) * c * k2_5(x2, x1, -t),
        ),
    ];
    Ok([
        SeriesFieldSample { terms: f1, shape: [1.0, 0.0], truncation: FIELD_TRUNCATION },
        SeriesFieldSample { terms: f2, shape: [0.0, 1.0], truncation: FIELD_TRUNCATION },
    ])
}

/// Series values of `[F1,F2]`, `[F1,[F1,F2]]` and `[F2,[F1,F2]]`.
pub fn series_brackets(x1: f64, x2: f64, y: f64, t: f64, a: f64) -> Result<SeriesBracketSample> {
    check(x1, x2, y)?;
    let (s, c) = t.sin_cos();
    let y4 = y.powi(4);
    let qq = q(x1, x2);
    let w = 27.0 * a / (512.0 * y4);
    let v = 81.0 * a / (512.0 * y4);

    let g = (x1.powi(4) + 2.0 * x1.powi(3) * x2 + x2 * x2 * x1 * x1 + 2.0 * x2.powi(3) * x1 + x2.powi(4))
        / ((x1 + x2).powi(2) * x2 * x2 * x1 * x1);
    let h = x1 * x2 * trig8(t) * (x1 * x1 - x2 * x2) / qq;
    let f1f2 = Vector3::new(
        -a / 3.0 * c * g - w * c * s * h,
        -a / 3.0 * s * g + w * c * c * h,
        v * c * x1 * x2 * (x1 + x2) * trig8(t) / qq,
    );

    let g1 = x2 * (3.0 * x1 * x1 + 3.0 * x1 * x2 + x2 * x2) / (x1.powi(3) * (x1 + x2).powi(3));
    let f1_f1f2 = Vector3::new(
        -2.0 * a / 3.0 * c * g1 + w * c * s * l3(x1, x2, t),
        -2.0 * a / 3.0 * s * g1 - w * c * c * l3(x1, x2, t),
        -v * c * l4(x1, x2, t),
    );

    let g2 = x1 * (x1 * x1 + 3.0 * x1 * x2 + 3.0 * x2 * x2) / (x2.powi(3) * (x1 + x2).powi(3));
    let f2_f1f2 = Vector3::new(
        -2.0 / 3.0 * a * c * g2 - w * c * s * l3(x2, x1, -t),
        -2.0 * a / 3.0 * s * g2 + w * c * c * l3(x2, x1, -t),
        -v * c * l4(x2, x1, -t),
    );
    Ok(SeriesBracketSample { f1f2, f1_f1f2, f2_f1f2, truncation: FIELD_TRUNCATION })
}

/// Leading term of the bracket determinant expansion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeterminantExpansion {
    pub leading: f64,
    /// Power of `1/y` of the leading term.
    pub order: i32,
    /// `theta = 0` subdeterminant coefficient and its `1/y` power, when `sin(theta) = 0`.
    pub delta: Option<(f64, i32)>,
}

impl DeterminantExpansion {
    pub fn value(&self, y: f64) -> f64 {
        self.leading / y.powi(self.order)
    }
}

/// Leading coefficient and order of the determinant of the bracket minor.
pub fn series_determinant(x1: f64, x2: f64, y: f64, t: f64, a: f64) -> Result<DeterminantExpansion> {
    check(x1, x2, y)?;
    let equal = (x1 - x2).abs() <= 1e-12 * x1.max(x2);
    let (leading, order) = if equal { (t_coefficient(x1, t, a), 10) } else { (det_coefficient(x1, x2, t, a), 9) };
    let delta = (t.sin().abs() < 1e-12).then(|| (delta_coefficient(x1, x2, a), 4));
    Ok(DeterminantExpansion { leading, order, delta })
}

/// Determinant of the 3x3 pose minor of a bracket sample.
pub fn minor_determinant(b: &SeriesBracketSample) -> f64 {
    b.minor().determinant()
}

/// Subdeterminant of components 3 and 5 of `[F1,F2]` and `[F1,[F1,F2]]`.
pub fn subdeterminant(b: &SeriesBracketSample) -> f64 {
    Matrix2::new(b.f1f2[0], b.f1_f1f2[0], b.f1f2[2], b.f1_f1f2[2]).determinant()
}
