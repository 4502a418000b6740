//! Python bindings. Heavy computations release the GIL.

use casimir_core::kernels::{k_space_kernels, r_space_kernels, ImagWavenumber, ThetaParameter};
use casimir_core::numerics::Tolerance;
use casimir_core::{geometry, matsubara, pair_energy, sphere_energy, Error};
use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

create_exception!(pycasimir, CasimirError, PyRuntimeError);

fn to_py(e: Error) -> PyErr {
    match e {
        Error::InvalidInput(m) => PyValueError::new_err(m),
        other => CasimirError::new_err(format!("{}: {other}", other.kind())),
    }
}

fn rel(tol: f64) -> Tolerance {
    Tolerance::new(0.0, tol)
}

#[pyclass(frozen, get_all, skip_from_py_object, module = "pycasimir")]
#[derive(Clone)]
pub struct Medium {
    pub alpha: f64,
    pub rho: f64,
    pub theta: f64,
}

impl Medium {
    fn inner(&self) -> PyResult<pair_energy::Medium> {
        Ok(pair_energy::Medium::new(self.alpha, self.rho)
            .map_err(to_py)?
            .with_theta(ThetaParameter(self.theta)))
    }
}

#[pymethods]
impl Medium {
    #[new]
    #[pyo3(signature = (alpha, rho, theta = -2.0))]
    fn new(alpha: f64, rho: f64, theta: f64) -> PyResult<Self> {
        pair_energy::Medium::new(alpha, rho).map_err(to_py)?;
        Ok(Self { alpha, rho, theta })
    }

    /// Medium with ε − 1 = 4πρα at leading dilute order.
    #[staticmethod]
    #[pyo3(signature = (eps_minus_one, alpha = 1.0))]
    fn dilute(eps_minus_one: f64, alpha: f64) -> PyResult<Self> {
        let m = pair_energy::Medium::dilute(eps_minus_one, alpha).map_err(to_py)?;
        Ok(Self {
            alpha: m.alpha,
            rho: m.rho,
            theta: m.theta.value(),
        })
    }

    #[getter]
    fn gamma(&self) -> f64 {
        4.0 * std::f64::consts::PI * self.rho * self.alpha
    }

    fn __repr__(&self) -> String {
        format!("Medium(alpha={}, rho={}, theta={})", self.alpha, self.rho, self.theta)
    }
}

#[pyclass(frozen, get_all, module = "pycasimir")]
pub struct PairEnergy {
    pub value: f64,
    pub route: String,
    pub error_estimate: f64,
}

impl From<pair_energy::PairEnergy> for PairEnergy {
    fn from(e: pair_energy::PairEnergy) -> Self {
        let route = match e.route {
            pair_energy::Route::RSpaceSum => "r-space-sum",
            pair_energy::Route::RSpaceT0Closed => "r-space-t0-closed",
            pair_energy::Route::RSpaceT0Integral => "r-space-t0-integral",
            pair_energy::Route::KSpace => "k-space",
            pair_energy::Route::DampedRSpace => "damped-r-space",
        };
        Self {
            value: e.value,
            route: route.to_string(),
            error_estimate: e.error_estimate,
        }
    }
}

#[pymethods]
impl PairEnergy {
    fn __repr__(&self) -> String {
        format!(
            "PairEnergy(value={}, route='{}', error_estimate={})",
            self.value, self.route, self.error_estimate
        )
    }
}

#[pyclass(frozen, get_all, module = "pycasimir")]
pub struct EnergyBreakdown {
    pub total: f64,
    pub total_error: f64,
    pub c_vol: f64,
    pub c_surf: f64,
    pub c_lin: f64,
    pub finite_1_over_a: f64,
    pub residual: f64,
    pub extra: Vec<(String, f64)>,
    pub condition_number: Option<f64>,
}

impl From<sphere_energy::EnergyBreakdown> for EnergyBreakdown {
    fn from(b: sphere_energy::EnergyBreakdown) -> Self {
        Self {
            total: b.total,
            total_error: b.total_error,
            c_vol: b.c_vol,
            c_surf: b.c_surf,
            c_lin: b.c_lin,
            finite_1_over_a: b.finite_1_over_a,
            residual: b.residual,
            extra: b.extra.into_iter().map(|c| (c.name, c.value)).collect(),
            condition_number: b.condition_number,
        }
    }
}

#[pymethods]
impl EnergyBreakdown {
    fn __repr__(&self) -> String {
        format!(
            "EnergyBreakdown(total={}, c_vol={}, c_surf={}, c_lin={}, finite_1_over_a={})",
            self.total, self.c_vol, self.c_surf, self.c_lin, self.finite_1_over_a
        )
    }
}

#[pyclass(frozen, get_all, module = "pycasimir")]
pub struct DielectricState {
    pub epsilon: f64,
    pub n_refr: f64,
    pub gamma: f64,
}

/// (ψ_D, ψ_Δ) at separation r and imaginary wavenumber κ.
#[pyfunction]
fn r_kernels(r: f64, kappa: f64) -> PyResult<(f64, f64)> {
    let p = r_space_kernels(r, ImagWavenumber::new(kappa).map_err(to_py)?).map_err(to_py)?;
    Ok((p.psi_d, p.psi_delta))
}

/// (ψ̃_D, ψ̃_Δ) at wavenumber k.
#[pyfunction]
#[pyo3(signature = (k, kappa, theta = -2.0, lam = 0.0))]
fn k_kernels(k: f64, kappa: f64, theta: f64, lam: f64) -> PyResult<(f64, f64)> {
    let p = k_space_kernels(k, ImagWavenumber::new(kappa).map_err(to_py)?, ThetaParameter(theta), lam)
        .map_err(to_py)?;
    Ok((p.psi_d, p.psi_delta))
}

#[pyfunction]
fn oscillator_sum_closed(beta: f64, hbar_omega0: f64) -> PyResult<f64> {
    matsubara::oscillator_sum_closed(beta, hbar_omega0).map_err(to_py)
}

#[pyfunction]
fn pair_energy_t0(r: f64, alpha: f64) -> PyResult<PairEnergy> {
    pair_energy::pair_energy_t0(r, alpha).map(Into::into).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (r, alpha, rel_tol = 1e-11))]
fn pair_energy_t0_numeric(py: Python<'_>, r: f64, alpha: f64, rel_tol: f64) -> PyResult<PairEnergy> {
    py.detach(|| pair_energy::pair_energy_t0_numeric(r, alpha, rel(rel_tol)))
        .map(Into::into)
        .map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (r, alpha, beta, rel_tol = 1e-10, max_index = matsubara::DEFAULT_MAX_INDEX))]
fn pair_free_energy(py: Python<'_>, r: f64, alpha: f64, beta: f64, rel_tol: f64, max_index: u64) -> PyResult<PairEnergy> {
    let medium = pair_energy::Medium::new(alpha, 0.0).map_err(to_py)?;
    let state = matsubara::ThermalState::new(beta)
        .map_err(to_py)?
        .with_relative_tolerance(rel_tol)
        .with_max_index(max_index);
    py.detach(|| pair_energy::pair_free_energy(r, &medium, &state))
        .map(Into::into)
        .map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (r, alpha, lam, rel_tol = 1e-9))]
fn kspace_pair_energy(py: Python<'_>, r: f64, alpha: f64, lam: f64, rel_tol: f64) -> PyResult<PairEnergy> {
    py.detach(|| pair_energy::kspace_pair_energy(r, alpha, lam, rel(rel_tol)))
        .map(Into::into)
        .map_err(to_py)
}

/// λ → 0 limit by Richardson extrapolation; defaults to λ = r·{0.1, 0.05, 0.025}.
#[pyfunction]
#[pyo3(signature = (r, alpha, lambdas = None, rel_tol = 1e-9))]
fn kspace_pair_energy_extrapolated(
    py: Python<'_>,
    r: f64,
    alpha: f64,
    lambdas: Option<Vec<f64>>,
    rel_tol: f64,
) -> PyResult<PairEnergy> {
    let lambdas = lambdas.unwrap_or_else(|| vec![0.1 * r, 0.05 * r, 0.025 * r]);
    py.detach(|| pair_energy::kspace_pair_energy_extrapolated(r, alpha, &lambdas, rel(rel_tol)))
        .map(|(e, _)| e.into())
        .map_err(to_py)
}

#[pyfunction]
fn overlap_volume(r: f64, a: f64) -> PyResult<f64> {
    geometry::overlap_volume(r, a).map_err(to_py)
}

#[pyfunction]
fn sphere_form_factor(q: f64, a: f64) -> PyResult<f64> {
    geometry::sphere_form_factor(q, a).map_err(to_py)
}

#[pyfunction]
fn epsilon_relation(medium: &Medium) -> PyResult<DielectricState> {
    let d = sphere_energy::epsilon_relation(&medium.inner()?).map_err(to_py)?;
    Ok(DielectricState {
        epsilon: d.epsilon,
        n_refr: d.n_refr,
        gamma: d.gamma,
    })
}

#[pyfunction]
fn finite_part_prediction(a: f64, medium: &Medium) -> PyResult<f64> {
    Ok(sphere_energy::finite_part_prediction(a, &medium.inner()?))
}

/// Hard-core sphere energy with its analytic decomposition.
#[pyfunction]
#[pyo3(signature = (a, medium, r_min, rel_tol = 1e-14))]
fn sphere_energy_rspace(py: Python<'_>, a: f64, medium: &Medium, r_min: f64, rel_tol: f64) -> PyResult<EnergyBreakdown> {
    let m = medium.inner()?;
    py.detach(|| sphere_energy::sphere_energy_rspace(a, &m, r_min, rel(rel_tol)))
        .map(Into::into)
        .map_err(to_py)
}

/// Fit of a hard-core r_min sweep (default 9 points over [1e-4, 1e-2]·a).
#[pyfunction]
#[pyo3(signature = (a, medium, r_mins = None, rel_tol = 1e-14))]
fn hardcore_fit(
    py: Python<'_>,
    a: f64,
    medium: &Medium,
    r_mins: Option<Vec<f64>>,
    rel_tol: f64,
) -> PyResult<EnergyBreakdown> {
    let m = medium.inner()?;
    let grid = r_mins.unwrap_or_else(|| sphere_energy::default_rmin_grid(a));
    py.detach(|| sphere_energy::hardcore_sweep(a, &m, &grid, rel(rel_tol)))
        .map(|s| s.fitted.into())
        .map_err(to_py)
}

/// Fit of a raw `(r_min, total)` sample set.
#[pyfunction]
fn decompose_fit(samples: Vec<(f64, f64)>, a: f64) -> PyResult<EnergyBreakdown> {
    sphere_energy::decompose_fit(&samples, a).map(Into::into).map_err(to_py)
}

/// Exponential-cutoff sphere energy, returned as (value, error_estimate).
#[pyfunction]
#[pyo3(signature = (a, medium, lam, route = "rspace", rel_tol = None))]
fn sphere_energy_exponential(
    py: Python<'_>,
    a: f64,
    medium: &Medium,
    lam: f64,
    route: &str,
    rel_tol: Option<f64>,
) -> PyResult<(f64, f64)> {
    let m = medium.inner()?;
    let q = match route {
        "rspace" => py.detach(|| sphere_energy::sphere_energy_exponential(a, &m, lam, rel(rel_tol.unwrap_or(1e-13)))),
        "kspace" => py.detach(|| sphere_energy::sphere_energy_kspace(a, &m, lam, rel(rel_tol.unwrap_or(1e-5)))),
        other => return Err(PyValueError::new_err(format!("unknown route '{other}'"))),
    }
    .map_err(to_py)?;
    Ok((q.value, q.error_estimate))
}

/// Fit of an exponential-cutoff λ sweep (default 15 points over [0.05, 0.4]·a).
#[pyfunction]
#[pyo3(signature = (a, medium, lambdas = None, basis = None, rel_tol = 1e-13))]
fn exponential_fit(
    py: Python<'_>,
    a: f64,
    medium: &Medium,
    lambdas: Option<Vec<f64>>,
    basis: Option<Vec<i32>>,
    rel_tol: f64,
) -> PyResult<EnergyBreakdown> {
    let m = medium.inner()?;
    let grid = lambdas.unwrap_or_else(|| sphere_energy::default_lambda_grid(a));
    let basis = basis.map_or_else(sphere_energy::ExponentialBasis::default, |powers| {
        sphere_energy::ExponentialBasis { powers }
    });
    py.detach(|| sphere_energy::exponential_sweep(a, &m, &grid, &basis, rel(rel_tol)))
        .map(|s| s.fitted.into())
        .map_err(to_py)
}

/// Self-energy as (closed form, numeric).
#[pyfunction]
#[pyo3(signature = (volume, gamma, lam, rel_tol = 1e-12))]
fn self_energy(volume: f64, gamma: f64, lam: f64, rel_tol: f64) -> PyResult<(f64, f64)> {
    let s = sphere_energy::self_energy(volume, gamma, lam, rel(rel_tol)).map_err(to_py)?;
    Ok((s.closed, s.numeric))
}

#[pymodule]
fn pycasimir(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("CasimirError", m.py().get_type::<CasimirError>())?;
    m.add_class::<Medium>()?;
    m.add_class::<PairEnergy>()?;
    m.add_class::<EnergyBreakdown>()?;
    m.add_class::<DielectricState>()?;
    m.add_function(wrap_pyfunction!(r_kernels, m)?)?;
    m.add_function(wrap_pyfunction!(k_kernels, m)?)?;
    m.add_function(wrap_pyfunction!(oscillator_sum_closed, m)?)?;
    m.add_function(wrap_pyfunction!(pair_energy_t0, m)?)?;
    m.add_function(wrap_pyfunction!(pair_energy_t0_numeric, m)?)?;
    m.add_function(wrap_pyfunction!(pair_free_energy, m)?)?;
    m.add_function(wrap_pyfunction!(kspace_pair_energy, m)?)?;
    m.add_function(wrap_pyfunction!(kspace_pair_energy_extrapolated, m)?)?;
    m.add_function(wrap_pyfunction!(overlap_volume, m)?)?;
    m.add_function(wrap_pyfunction!(sphere_form_factor, m)?)?;
    m.add_function(wrap_pyfunction!(epsilon_relation, m)?)?;
    m.add_function(wrap_pyfunction!(finite_part_prediction, m)?)?;
    m.add_function(wrap_pyfunction!(sphere_energy_rspace, m)?)?;
    m.add_function(wrap_pyfunction!(hardcore_fit, m)?)?;
    m.add_function(wrap_pyfunction!(decompose_fit, m)?)?;
    m.add_function(wrap_pyfunction!(sphere_energy_exponential, m)?)?;
    m.add_function(wrap_pyfunction!(exponential_fit, m)?)?;
    m.add_function(wrap_pyfunction!(self_energy, m)?)?;
    Ok(())
}
