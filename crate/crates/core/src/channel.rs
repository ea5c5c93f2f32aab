//! Longitudinal-wave channel of a drill string.
//!
//! The string is a cascade of uniform tube elements (pipes and tool joints).
//! Each element contributes a 2x2 transfer matrix; the product over all
//! elements links the wave state at the transmitter end to the state at the
//! receiver end, and solving the boundary equations for the reflection and
//! transmission coefficients yields the frequency response `T(f)`. The
//! channel impulse response is the inverse DFT of `T` sampled on an exact
//! `f_s / l` grid.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// 2x2 complex matrix, row-major.
pub type Matrix2 = [[Complex64; 2]; 2];

/// Condition numbers above this are treated as a failed solve.
pub const MAX_CONDITION: f64 = 1e12;

const J: Complex64 = Complex64::new(0.0, 1.0);

/// One uniform tube element.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub length_m: f64,
    pub area_m2: f64,
}

impl Segment {
    pub fn new(length_m: f64, area_m2: f64) -> Self {
        Self { length_m, area_m2 }
    }
}

/// Geometry and material of a drill string, ordered from the receiver
/// (surface, element 1) to the transmitter (downhole, element N).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DrillStringSpec {
    segments: Vec<Segment>,
    wave_speed: f64,
    density: f64,
}

impl DrillStringSpec {
    pub fn new(segments: Vec<Segment>, wave_speed: f64, density: f64) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::invalid("segments", "drill string has no elements"));
        }
        for (i, s) in segments.iter().enumerate() {
            if !(s.length_m > 0.0 && s.length_m.is_finite()) {
                return Err(Error::invalid(
                    format!("segments[{i}].length_m"),
                    format!("must be positive, got {}", s.length_m),
                ));
            }
            if !(s.area_m2 > 0.0 && s.area_m2.is_finite()) {
                return Err(Error::invalid(
                    format!("segments[{i}].area_m2"),
                    format!("must be positive, got {}", s.area_m2),
                ));
            }
        }
        if !(wave_speed > 0.0 && wave_speed.is_finite()) {
            return Err(Error::invalid("wave_speed", format!("must be positive, got {wave_speed}")));
        }
        if !(density > 0.0 && density.is_finite()) {
            return Err(Error::invalid("density", format!("must be positive, got {density}")));
        }
        Ok(Self {
            segments,
            wave_speed,
            density,
        })
    }

    /// Pipes and joints alternating, starting and ending with a pipe when
    /// `n_joints = n_pipes - 1`.
    pub fn alternating(
        n_pipes: usize,
        n_joints: usize,
        pipe: Segment,
        joint: Segment,
        wave_speed: f64,
        density: f64,
    ) -> Result<Self> {
        if n_joints > n_pipes || n_pipes > n_joints + 1 {
            return Err(Error::invalid(
                "n_joints",
                format!("{n_joints} joints cannot alternate with {n_pipes} pipes"),
            ));
        }
        let mut segments = Vec::with_capacity(n_pipes + n_joints);
        for i in 0..n_pipes + n_joints {
            segments.push(if i % 2 == 0 { pipe } else { joint });
        }
        Self::new(segments, wave_speed, density)
    }

    /// Ten 8.76 m steel pipes joined by nine 0.24 m tool joints.
    pub fn reference() -> Self {
        Self::alternating(
            10,
            9,
            Segment::new(8.760, 52.276e-4),
            Segment::new(0.240, 248.186e-4),
            5.13e3,
            7.87e3,
        )
        .expect("reference geometry is valid")
    }

    /// Single element of constant cross-section.
    pub fn uniform_rod(length_m: f64, area_m2: f64, wave_speed: f64, density: f64) -> Result<Self> {
        Self::new(vec![Segment::new(length_m, area_m2)], wave_speed, density)
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn wave_speed(&self) -> f64 {
        self.wave_speed
    }

    pub fn density(&self) -> f64 {
        self.density
    }

    pub fn total_length(&self) -> f64 {
        self.segments.iter().map(|s| s.length_m).sum()
    }
}

/// Reflection and transmission coefficients of the whole string at one frequency.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScatterCoefficients {
    pub reflection: Complex64,
    pub transmission: Complex64,
    /// 1-norm condition estimate of the row-equilibrated boundary system.
    pub condition: f64,
}

/// `k = 2 pi f / c`.
pub fn wavenumber(frequency_hz: f64, wave_speed: f64) -> Result<f64> {
    if !(wave_speed > 0.0) {
        return Err(Error::invalid("wave_speed", format!("must be positive, got {wave_speed}")));
    }
    if !(frequency_hz >= 0.0) {
        return Err(Error::invalid("frequency_hz", format!("must be non-negative, got {frequency_hz}")));
    }
    Ok(2.0 * PI * frequency_hz / wave_speed)
}

/// Element matrix `A(x)` of a tube with cross-section `area` at position `x`
/// along the element.
pub fn element_matrix(k: f64, x: f64, area: f64, density: f64, wave_speed: f64) -> Result<Matrix2> {
    if k == 0.0 {
        return Err(Error::ZeroWavenumber);
    }
    let stiffness = density * area * wave_speed * wave_speed * k * k;
    let (s, c) = (k * x).sin_cos();
    Ok([
        [Complex64::new(-k * s, 0.0), J * (k * c)],
        [Complex64::new(stiffness * c, 0.0), J * (stiffness * s)],
    ])
}

/// Closed-form inverse of `A(0) = [[0, jk], [Z k^2, 0]]`.
fn element_matrix_at_origin_inv(k: f64, area: f64, density: f64, wave_speed: f64) -> Result<Matrix2> {
    if k == 0.0 {
        return Err(Error::ZeroWavenumber);
    }
    let stiffness = density * area * wave_speed * wave_speed * k * k;
    let zero = Complex64::new(0.0, 0.0);
    Ok([
        [zero, Complex64::new(1.0 / stiffness, 0.0)],
        [Complex64::new(0.0, -1.0 / k), zero],
    ])
}

pub fn mat_mul(a: &Matrix2, b: &Matrix2) -> Matrix2 {
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

fn mat_vec(a: &Matrix2, v: [Complex64; 2]) -> [Complex64; 2] {
    [a[0][0] * v[0] + a[0][1] * v[1], a[1][0] * v[0] + a[1][1] * v[1]]
}

/// Cascade `M = A_N(d_N) A_N(0)^-1 ... A_1(d_1) A_1(0)^-1`.
pub fn string_matrix(spec: &DrillStringSpec, k: f64) -> Result<Matrix2> {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let mut m: Matrix2 = [[one, zero], [zero, one]];
    for seg in spec.segments() {
        let at_end = element_matrix(k, seg.length_m, seg.area_m2, spec.density, spec.wave_speed)?;
        let origin_inv = element_matrix_at_origin_inv(k, seg.area_m2, spec.density, spec.wave_speed)?;
        m = mat_mul(&mat_mul(&at_end, &origin_inv), &m);
    }
    Ok(m)
}

fn solve2(a: &Matrix2, b: [Complex64; 2]) -> Option<([Complex64; 2], f64)> {
    // Rows of the boundary system differ in scale by ~Z k; equilibrate before
    // estimating the condition number.
    let mut a = *a;
    let mut b = b;
    for i in 0..2 {
        let scale = a[i][0].norm().max(a[i][1].norm());
        if scale == 0.0 {
            return None;
        }
        a[i][0] /= scale;
        a[i][1] /= scale;
        b[i] /= scale;
    }
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    if det.norm() == 0.0 || !det.is_finite() {
        return None;
    }
    let inv = [
        [a[1][1] / det, -a[0][1] / det],
        [-a[1][0] / det, a[0][0] / det],
    ];
    let norm1 = |m: &Matrix2| {
        (m[0][0].norm() + m[1][0].norm()).max(m[0][1].norm() + m[1][1].norm())
    };
    let condition = norm1(&a) * norm1(&inv);
    Some((mat_vec(&inv, b), condition))
}

/// Solves `A_N(0) [1+R, 1-R]^T = M A_1(0) [T, T]^T` for `(R, T)`.
pub fn scatter(spec: &DrillStringSpec, frequency_hz: f64) -> Result<ScatterCoefficients> {
    if !(frequency_hz > 0.0) {
        return Err(Error::invalid(
            "frequency_hz",
            format!("scattering needs f > 0, got {frequency_hz}"),
        ));
    }
    let k = wavenumber(frequency_hz, spec.wave_speed)?;
    let m = string_matrix(spec, k)?;
    let first = spec.segments()[0];
    let last = spec.segments()[spec.segments().len() - 1];

    let a1 = element_matrix(k, 0.0, first.area_m2, spec.density, spec.wave_speed)?;
    let an = element_matrix(k, 0.0, last.area_m2, spec.density, spec.wave_speed)?;
    let one = Complex64::new(1.0, 0.0);
    // v T = M A_1(0) [T, T]^T
    let v = mat_vec(&m, mat_vec(&a1, [one, one]));
    // A_N(0)[1+R, 1-R] = an.col0 (1+R) + an.col1 (1-R)
    //   => (an.col0 - an.col1) R - v T = -(an.col0 + an.col1)
    let system = [
        [an[0][0] - an[0][1], -v[0]],
        [an[1][0] - an[1][1], -v[1]],
    ];
    let rhs = [-(an[0][0] + an[0][1]), -(an[1][0] + an[1][1])];
    match solve2(&system, rhs) {
        Some(([reflection, transmission], condition)) if condition <= MAX_CONDITION => {
            Ok(ScatterCoefficients {
                reflection,
                transmission,
                condition,
            })
        }
        Some((_, condition)) => Err(Error::IllConditioned {
            frequency_hz,
            condition,
        }),
        None => Err(Error::IllConditioned {
            frequency_hz,
            condition: f64::INFINITY,
        }),
    }
}

/// Transmission coefficient at each grid frequency. A 0 Hz point maps to 0.
pub fn frequency_response(spec: &DrillStringSpec, grid: &[f64]) -> Result<Vec<Complex64>> {
    for (i, w) in grid.windows(2).enumerate() {
        if !(w[1] > w[0]) {
            return Err(Error::invalid(
                format!("grid[{}]", i + 1),
                "frequency grid must be strictly increasing",
            ));
        }
    }
    grid.iter()
        .map(|&f| {
            if f == 0.0 {
                Ok(Complex64::new(0.0, 0.0))
            } else {
                scatter(spec, f).map(|s| s.transmission)
            }
        })
        .collect()
}

/// Inverse DFT (1/l normalization) of a response sampled on the grid
/// `0, f_s/l, ..., (l-1) f_s/l`.
pub fn discrete_impulse_response(
    grid: &[f64],
    response: &[Complex64],
    sample_rate: f64,
    len: usize,
) -> Result<Vec<Complex64>> {
    if grid.len() != len || response.len() != len {
        return Err(Error::Shape {
            context: "impulse response grid",
            expected: len,
            actual: grid.len().min(response.len()),
        });
    }
    let spacing = sample_rate / len as f64;
    for (i, &f) in grid.iter().enumerate() {
        if (f - i as f64 * spacing).abs() > 1e-9 * sample_rate {
            return Err(Error::invalid(
                format!("grid[{i}]"),
                format!("expected {} Hz on the f_s/l grid, got {f}", i as f64 * spacing),
            ));
        }
    }
    let mut buf = response.to_vec();
    FftPlanner::new().plan_fft_inverse(len).process(&mut buf);
    let scale = 1.0 / len as f64;
    buf.iter_mut().for_each(|v| *v *= scale);
    Ok(buf)
}

/// Sampled channel: response on the `f_s/l` grid and the matching impulse
/// response of length `l`.
/// Maximal runs of `grid` where `|T| >= min_gain`, as `(first, last)`
/// frequencies. Runs touching either end of the grid are kept as they are.
pub fn passbands(spec: &DrillStringSpec, grid: &[f64], min_gain: f64) -> Result<Vec<(f64, f64)>> {
    let response = frequency_response(spec, grid)?;
    let mut bands = Vec::new();
    let mut start = None;
    for (i, h) in response.iter().enumerate() {
        match (h.norm() >= min_gain, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                bands.push((grid[s], grid[i - 1]));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        bands.push((grid[s], grid[grid.len() - 1]));
    }
    Ok(bands)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChannelRealization {
    pub freq_grid: Vec<f64>,
    pub response: Vec<Complex64>,
    pub impulse: Vec<Complex64>,
    pub sample_rate: f64,
    pub carrier: f64,
}

impl ChannelRealization {
    pub fn synthesize(spec: &DrillStringSpec, sample_rate: f64, len: usize, carrier: f64) -> Result<Self> {
        if len == 0 {
            return Err(Error::invalid("l", "impulse length must be positive"));
        }
        let spacing = sample_rate / len as f64;
        let freq_grid: Vec<f64> = (0..len).map(|i| i as f64 * spacing).collect();
        let response = frequency_response(spec, &freq_grid)?;
        let impulse = discrete_impulse_response(&freq_grid, &response, sample_rate, len)?;
        Ok(Self {
            freq_grid,
            response,
            impulse,
            sample_rate,
            carrier,
        })
    }

    /// Channel given directly by its impulse response; the response is its DFT.
    pub fn from_impulse(impulse: Vec<Complex64>, sample_rate: f64, carrier: f64) -> Self {
        let len = impulse.len();
        let spacing = sample_rate / len as f64;
        let mut response = impulse.clone();
        FftPlanner::new().plan_fft_forward(len).process(&mut response);
        Self {
            freq_grid: (0..len).map(|i| i as f64 * spacing).collect(),
            response,
            impulse,
            sample_rate,
            carrier,
        }
    }

    /// `delta[delay]` of length `len`.
    pub fn pure_delay(delay: usize, len: usize, sample_rate: f64, carrier: f64) -> Self {
        let mut impulse = vec![Complex64::new(0.0, 0.0); len];
        impulse[delay] = Complex64::new(1.0, 0.0);
        Self::from_impulse(impulse, sample_rate, carrier)
    }

    pub fn len(&self) -> usize {
        self.impulse.len()
    }

    pub fn is_empty(&self) -> bool {
        self.impulse.is_empty()
    }

    /// DTFT of the impulse response at an arbitrary frequency.
    pub fn gain_at(&self, frequency_hz: f64) -> Complex64 {
        let w = -2.0 * PI * frequency_hz / self.sample_rate;
        self.impulse
            .iter()
            .enumerate()
            .map(|(n, &h)| h * Complex64::from_polar(1.0, w * n as f64))
            .sum()
    }
}
