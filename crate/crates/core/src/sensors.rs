//! Scalar sensors (range, bearing, linear), unscented measurement updates and
//! measurement-set simulation.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};

use crate::gm::Gaussian;
use crate::labeled::Label;
use crate::linalg::wrap_angle;
use crate::models::ProbabilityModel;

/// Diagonal of a 50 km × 50 km area; default TOA measurement-space bound.
pub const DEFAULT_RANGE_MAX: f64 = 70_710.678_118_654_75;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SensorError {
    #[error("bearing undefined: object at sensor position")]
    DegenerateGeometry,
    #[error("innovation variance {0} is not positive")]
    NonPositiveInnovation(f64),
    #[error("posterior covariance is not positive definite")]
    PosteriorNotPd,
    #[error("prior covariance has no Cholesky factor")]
    PriorNotPd,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SensorKind {
    /// Range to the sensor position.
    Toa,
    /// Four-quadrant bearing from the sensor position.
    Doa,
    /// `h(x) = c·x`.
    Linear { row: Vec<f64> },
}

#[derive(Debug, Clone)]
pub struct SensorModel {
    pub kind: SensorKind,
    pub position: [f64; 2],
    pub noise_std: f64,
    pub clutter_rate: f64,
    pub detection: ProbabilityModel,
    /// Measurement-space bounds `[low, high]`; bearing space is `(−π, π]`.
    pub space: (f64, f64),
}

impl SensorModel {
    pub fn toa(position: [f64; 2], noise_std: f64, clutter_rate: f64, p_d: f64) -> Self {
        Self {
            kind: SensorKind::Toa,
            position,
            noise_std,
            clutter_rate,
            detection: ProbabilityModel::Constant(p_d),
            space: (0.0, DEFAULT_RANGE_MAX),
        }
    }

    pub fn doa(position: [f64; 2], noise_std: f64, clutter_rate: f64, p_d: f64) -> Self {
        Self {
            kind: SensorKind::Doa,
            position,
            noise_std,
            clutter_rate,
            detection: ProbabilityModel::Constant(p_d),
            space: (-PI, PI),
        }
    }

    pub fn linear(row: Vec<f64>, noise_std: f64, clutter_rate: f64, p_d: f64, space: (f64, f64)) -> Self {
        Self {
            kind: SensorKind::Linear { row },
            position: [0.0, 0.0],
            noise_std,
            clutter_rate,
            detection: ProbabilityModel::Constant(p_d),
            space,
        }
    }

    pub fn measure(&self, x: &DVector<f64>) -> Result<f64, SensorError> {
        match &self.kind {
            SensorKind::Toa => {
                let dx = x[0] - self.position[0];
                let dy = x[2] - self.position[1];
                Ok(dx.hypot(dy))
            }
            SensorKind::Doa => {
                let dx = x[0] - self.position[0];
                let dy = x[2] - self.position[1];
                if dx == 0.0 && dy == 0.0 {
                    return Err(SensorError::DegenerateGeometry);
                }
                Ok(wrap_angle(dy.atan2(dx)))
            }
            SensorKind::Linear { row } => Ok(row.iter().zip(x.iter()).map(|(a, b)| a * b).sum()),
        }
    }

    /// `z − ẑ`, wrapped into `(−π, π]` for bearings.
    pub fn residual(&self, z: f64, z_hat: f64) -> f64 {
        match self.kind {
            SensorKind::Doa => wrap_angle(z - z_hat),
            _ => z - z_hat,
        }
    }

    pub fn space_volume(&self) -> f64 {
        self.space.1 - self.space.0
    }

    pub fn in_space(&self, z: f64) -> bool {
        match self.kind {
            SensorKind::Doa => z > -PI && z <= PI,
            _ => z >= self.space.0 && z <= self.space.1,
        }
    }

    /// Uniform clutter intensity `κ(z) = λ_c / |Z|` inside the space, 0 outside.
    pub fn clutter_intensity(&self, z: f64) -> f64 {
        if self.in_space(z) {
            self.clutter_rate / self.space_volume()
        } else {
            0.0
        }
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_std * self.noise_std
    }
}

/// Unscented transform parameters. `kappa = None` means `3 − d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UtParams {
    pub alpha: f64,
    pub beta: f64,
    pub kappa: Option<f64>,
}

impl Default for UtParams {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            beta: 2.0,
            kappa: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SigmaPoints {
    pub points: Vec<DVector<f64>>,
    pub mean_weights: Vec<f64>,
    pub cov_weights: Vec<f64>,
}

/// Symmetric `2d + 1` sigma set for `g`, or `None` if the scaled covariance
/// has no Cholesky factor.
pub fn sigma_points(g: &Gaussian, ut: &UtParams) -> Option<SigmaPoints> {
    let d = g.dim();
    let df = d as f64;
    let kappa = ut.kappa.unwrap_or(3.0 - df);
    let lambda = ut.alpha * ut.alpha * (df + kappa) - df;
    let scale = df + lambda;
    if scale <= 0.0 {
        return None;
    }
    let l = (g.covariance() * scale).cholesky()?.l();
    let m = g.mean();
    let mut points = Vec::with_capacity(2 * d + 1);
    points.push(m.clone());
    for i in 0..d {
        points.push(m + l.column(i));
    }
    for i in 0..d {
        points.push(m - l.column(i));
    }
    let w = 1.0 / (2.0 * scale);
    let mut mean_weights = vec![w; 2 * d + 1];
    let mut cov_weights = vec![w; 2 * d + 1];
    mean_weights[0] = lambda / scale;
    cov_weights[0] = lambda / scale + (1.0 - ut.alpha * ut.alpha + ut.beta);
    Some(SigmaPoints {
        points,
        mean_weights,
        cov_weights,
    })
}

/// Predicted measurement statistics of one Gaussian; independent of `z`, so
/// computed once and reused for every measurement.
#[derive(Debug, Clone)]
pub struct MeasurementPrediction {
    pub z_hat: f64,
    pub innovation_var: f64,
    pub cross_cov: DVector<f64>,
}

pub fn predict_measurement(prior: &Gaussian, sensor: &SensorModel, ut: &UtParams) -> Result<MeasurementPrediction, SensorError> {
    let sp = sigma_points(prior, ut).ok_or(SensorError::PriorNotPd)?;
    let mut zs = Vec::with_capacity(sp.points.len());
    for x in &sp.points {
        zs.push(sensor.measure(x)?);
    }
    if matches!(sensor.kind, SensorKind::Doa) {
        // Unwrap around the central point so the weighted mean is meaningful.
        let z0 = zs[0];
        for z in zs.iter_mut().skip(1) {
            *z = z0 + wrap_angle(*z - z0);
        }
    }
    let z_hat: f64 = zs.iter().zip(&sp.mean_weights).map(|(z, w)| w * z).sum();
    let mut s = sensor.noise_variance();
    let mut pxz = DVector::zeros(prior.dim());
    for ((x, z), w) in sp.points.iter().zip(&zs).zip(&sp.cov_weights) {
        let dz = z - z_hat;
        s += w * dz * dz;
        pxz += (x - prior.mean()) * (w * dz);
    }
    if !(s > 0.0) {
        return Err(SensorError::NonPositiveInnovation(s));
    }
    let z_hat = match sensor.kind {
        SensorKind::Doa => wrap_angle(z_hat),
        _ => z_hat,
    };
    Ok(MeasurementPrediction {
        z_hat,
        innovation_var: s,
        cross_cov: pxz,
    })
}

/// Log-likelihood `log N(z − ẑ; 0, S)` of a measurement under a prediction.
pub fn log_likelihood(pred: &MeasurementPrediction, z: f64, sensor: &SensorModel) -> f64 {
    let nu = sensor.residual(z, pred.z_hat);
    let s = pred.innovation_var;
    -0.5 * ((2.0 * PI * s).ln() + nu * nu / s)
}

/// Kalman-form correction of `prior` given a precomputed prediction.
pub fn update_with_prediction(
    prior: &Gaussian,
    pred: &MeasurementPrediction,
    z: f64,
    sensor: &SensorModel,
) -> Result<(Gaussian, f64), SensorError> {
    let nu = sensor.residual(z, pred.z_hat);
    let s = pred.innovation_var;
    let gain = &pred.cross_cov / s;
    let mean = prior.mean() + &gain * nu;
    let cov: DMatrix<f64> = prior.covariance() - &gain * gain.transpose() * s;
    let post = Gaussian::from_parts(mean, cov).map_err(|_| SensorError::PosteriorNotPd)?;
    Ok((post, log_likelihood(pred, z, sensor)))
}

/// Unscented measurement update returning the posterior and `log N(ν; 0, S)`.
pub fn unscented_update(prior: &Gaussian, z: f64, sensor: &SensorModel, ut: &UtParams) -> Result<(Gaussian, f64), SensorError> {
    let pred = predict_measurement(prior, sensor, ut)?;
    update_with_prediction(prior, &pred, z, sensor)
}

/// Independent rng stream for one (trial, sensor) pair under a master seed.
pub fn stream_rng(master_seed: u64, trial: u64, sensor: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial.wrapping_mul(1 << 20).wrapping_add(sensor));
    rng
}

/// One scan: detections of `truth` (in order) followed by Poisson clutter,
/// uniform on the measurement space.
pub fn simulate_measurements<R: Rng + ?Sized>(
    truth: &[(Label, DVector<f64>)],
    sensor: &SensorModel,
    k: u32,
    rng: &mut R,
) -> Result<Vec<f64>, SensorError> {
    let noise = Normal::new(0.0, sensor.noise_std).expect("noise std validated positive");
    let mut z = Vec::new();
    for (label, x) in truth {
        let p_d = sensor.detection.eval(x, *label, k);
        if rng.random::<f64>() < p_d {
            let v = sensor.measure(x)? + noise.sample(rng);
            z.push(match sensor.kind {
                SensorKind::Doa => wrap_angle(v),
                _ => v,
            });
        }
    }
    if sensor.clutter_rate > 0.0 {
        let n = Poisson::new(sensor.clutter_rate).expect("clutter rate validated").sample(rng) as usize;
        let (lo, hi) = sensor.space;
        for _ in 0..n {
            let u: f64 = rng.random();
            let v = hi - u * (hi - lo);
            z.push(v);
        }
    }
    Ok(z)
}
