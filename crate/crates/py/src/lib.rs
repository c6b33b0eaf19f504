use std::collections::BTreeMap;

use pyo3::exceptions::{PyIndexError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use aus_core::constructor::{self, construct_system, ConstructionParams, SystemBundle};
use aus_core::dyadic::{self as dyadic, DyadicTree};
use aus_core::group::{enumerate_irreps, Group, GroupPoint, IrrepLabel};
use aus_core::rademacher::RampShape;
use aus_core::report::{self, F0Spec};
use aus_core::spectral::{synthesize, RawCoeffs, SpectralCoeffs};
use aus_core::verifier::{verify_bundle, VerificationReport, VerifyOptions};

type RawMap = BTreeMap<String, Vec<(f64, f64)>>;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_group(s: &str) -> PyResult<Group> {
    s.parse().map_err(value_err)
}

fn f0_from(group: Group, f0: Option<RawMap>) -> PyResult<SpectralCoeffs> {
    let spec = match f0 {
        None => F0Spec::default(),
        Some(map) => F0Spec::Inline {
            coeffs: RawCoeffs(
                map.into_iter()
                    .map(|(k, v)| (k, v.into_iter().map(|(re, im)| [re, im]).collect()))
                    .collect(),
            ),
        },
    };
    spec.resolve(group).map_err(value_err)
}

fn point(group: Group, coords: &[f64]) -> PyResult<GroupPoint> {
    match (group, coords) {
        (Group::Circle, [t]) => Ok(GroupPoint::circle(*t)),
        (Group::Torus(d), c) if c.len() == d => Ok(GroupPoint::torus(c.to_vec())),
        (Group::Su2, [a, b, g]) => Ok(GroupPoint::su2(*a, *b, *g)),
        _ => Err(PyValueError::new_err(format!("{} coordinates do not name a point of {group}", coords.len()))),
    }
}

fn to_map(c: &SpectralCoeffs) -> RawMap {
    c.to_raw()
        .0
        .into_iter()
        .map(|(k, v)| (k, v.into_iter().map(|[re, im]| (re, im)).collect()))
        .collect()
}

/// One function of a constructed system.
#[pyclass(frozen, module = "aus")]
struct Record {
    inner: constructor::SystemRecord,
    group: Group,
}

#[pymethods]
impl Record {
    #[getter]
    fn m(&self) -> usize {
        self.inner.m
    }

    #[getter]
    fn k_m(&self) -> u32 {
        self.inner.k_m
    }

    #[getter]
    fn delta_m(&self) -> Option<f64> {
        self.inner.delta_m
    }

    #[getter]
    fn lambda_labels(&self) -> Vec<String> {
        self.inner.lambda.iter().map(|l| l.to_string()).collect()
    }

    #[getter]
    fn support(&self) -> Vec<String> {
        self.inner.coeffs.labels().map(|l| l.to_string()).collect()
    }

    #[getter]
    fn omega(&self) -> Vec<(f64, f64)> {
        self.inner.omega.clone()
    }

    #[getter]
    fn omega_measure(&self) -> f64 {
        self.inner.omega_measure
    }

    #[getter]
    fn sup_err(&self) -> f64 {
        self.inner.sup_err
    }

    #[getter]
    fn bandlimit(&self) -> u32 {
        self.inner.bandlimit
    }

    #[getter]
    fn taper(&self) -> String {
        self.inner.taper.to_string()
    }

    /// Coefficients as `{label: [(re, im), ...]}`, matrices row-major.
    fn coeffs(&self) -> RawMap {
        to_map(&self.inner.coeffs)
    }

    /// `f_m` at a point given by its angles.
    fn __call__(&self, coords: Vec<f64>) -> PyResult<(f64, f64)> {
        let z = synthesize(&self.inner.coeffs, &point(self.group, &coords)?);
        Ok((z.re, z.im))
    }

    fn __repr__(&self) -> String {
        format!(
            "Record(m={}, k_m={}, support={}, sup_err={:.3e})",
            self.inner.m,
            self.inner.k_m,
            self.inner.coeffs.len(),
            self.inner.sup_err
        )
    }
}

/// A constructed system, possibly partial.
#[pyclass(frozen, module = "aus")]
struct Bundle {
    inner: SystemBundle,
}

#[pymethods]
impl Bundle {
    #[staticmethod]
    fn from_json(s: &str) -> PyResult<Self> {
        SystemBundle::from_json(s).map(|inner| Bundle { inner }).map_err(value_err)
    }

    #[staticmethod]
    fn read(path: &str) -> PyResult<Self> {
        SystemBundle::read(path.as_ref()).map(|inner| Bundle { inner }).map_err(value_err)
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn write(&self, path: &str) -> PyResult<()> {
        self.inner.write(path.as_ref()).map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }

    #[getter]
    fn group(&self) -> String {
        self.inner.group().to_string()
    }

    #[getter]
    fn epsilons(&self) -> Vec<f64> {
        self.inner.epsilons.clone()
    }

    #[getter]
    fn partial(&self) -> bool {
        self.inner.partial
    }

    #[getter]
    fn failure(&self) -> Option<String> {
        self.inner.failure.clone()
    }

    /// Boundaries of dyadic level `k`.
    fn boundaries(&self, k: u32) -> PyResult<Vec<f64>> {
        self.inner.tree.boundaries(k).map(<[f64]>::to_vec).map_err(value_err)
    }

    fn summary(&self) -> Vec<String> {
        report::summary_lines(&self.inner)
    }

    /// `(t, |f_m|, |f_0|, in_omega)` along the sweep coordinate for record `i`.
    fn profile(&self, i: usize) -> PyResult<Vec<(f64, f64, f64, bool)>> {
        if i >= self.inner.records.len() {
            return Err(PyIndexError::new_err("record index out of range"));
        }
        Ok(report::sweep_profile(&self.inner, i)
            .into_iter()
            .map(|r| (r.t, r.abs_f, r.abs_f0, r.in_omega))
            .collect())
    }

    fn __len__(&self) -> usize {
        self.inner.records.len()
    }

    fn __getitem__(&self, i: isize) -> PyResult<Record> {
        let n = self.inner.records.len() as isize;
        let j = if i < 0 { i + n } else { i };
        if j < 0 || j >= n {
            return Err(PyIndexError::new_err("record index out of range"));
        }
        Ok(Record {
            inner: self.inner.records[j as usize].clone(),
            group: self.inner.group(),
        })
    }

    fn __repr__(&self) -> String {
        format!(
            "Bundle(group={}, records={}, partial={})",
            self.inner.group(),
            self.inner.records.len(),
            self.inner.partial
        )
    }
}

/// Verifier output.
#[pyclass(frozen, module = "aus")]
struct Report {
    inner: VerificationReport,
}

#[pymethods]
impl Report {
    #[getter]
    fn passed(&self) -> bool {
        self.inner.passed
    }

    #[getter]
    fn failed_checks(&self) -> Vec<String> {
        self.inner.failed_checks.clone()
    }

    /// Per record: `(upper margin, lower margin, residual, mu(Omega))`.
    #[getter]
    fn margins(&self) -> Vec<(f64, f64, f64, f64)> {
        self.inner
            .records
            .iter()
            .map(|r| (r.upper.margin, r.lower.margin, r.disjoint.residual, r.omega.measure))
            .collect()
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn __repr__(&self) -> String {
        format!("Report(passed={}, failed={:?})", self.inner.passed, self.inner.failed_checks)
    }
}

/// Dyadic partition of the sweep coordinate for the weight `|f0|^2`.
#[pyclass(frozen, module = "aus")]
struct Tree {
    inner: DyadicTree,
}

#[pymethods]
impl Tree {
    #[new]
    #[pyo3(signature = (group, k_max, f0=None))]
    fn new(group: &str, k_max: u32, f0: Option<RawMap>) -> PyResult<Self> {
        let f0 = f0_from(parse_group(group)?, f0)?;
        DyadicTree::from_weight(&f0, k_max).map(|inner| Tree { inner }).map_err(value_err)
    }

    #[getter]
    fn k_max(&self) -> u32 {
        self.inner.k_max()
    }

    fn boundaries(&self, k: u32) -> PyResult<Vec<f64>> {
        self.inner.boundaries(k).map(<[f64]>::to_vec).map_err(value_err)
    }

    fn cores(&self, k: u32) -> PyResult<Vec<(f64, f64)>> {
        dyadic::shrink_cores(&self.inner, k).map(|c| c.intervals).map_err(value_err)
    }

    fn omega_measure(&self, k: u32) -> PyResult<f64> {
        dyadic::omega_measure(&self.inner, k).map_err(value_err)
    }
}

/// Builds the system for `eps`. With `allow_partial`, a cap failure returns
/// the completed prefix instead of raising.
#[pyfunction]
#[pyo3(signature = (group, eps, f0=None, count=None, k_cap=None, band_cap=None, ramp="smooth", allow_partial=false))]
#[allow(clippy::too_many_arguments)]
fn construct(
    py: Python<'_>,
    group: &str,
    eps: Vec<f64>,
    f0: Option<RawMap>,
    count: Option<usize>,
    k_cap: Option<u32>,
    band_cap: Option<u32>,
    ramp: &str,
    allow_partial: bool,
) -> PyResult<Bundle> {
    let group = parse_group(group)?;
    let mut params = ConstructionParams::new(f0_from(group, f0)?, eps);
    params.count = count.unwrap_or(params.count);
    params.k_cap = k_cap.unwrap_or(params.k_cap);
    params.band_cap = band_cap.unwrap_or(params.band_cap);
    params.ramp = ramp.parse::<RampShape>().map_err(PyValueError::new_err)?;
    match py.detach(|| construct_system(&params)) {
        Ok(inner) => Ok(Bundle { inner }),
        Err(f) => match f.bundle {
            Some(b) if allow_partial => Ok(Bundle { inner: *b }),
            _ if f.error.is_cap() => Err(PyRuntimeError::new_err(f.error.to_string())),
            _ => Err(value_err(f.error)),
        },
    }
}

#[pyfunction]
#[pyo3(signature = (bundle, grid_factor=8, random_points=10000, seed=0))]
fn verify(py: Python<'_>, bundle: &Bundle, grid_factor: usize, random_points: usize, seed: u64) -> PyResult<Report> {
    let opts = VerifyOptions {
        grid_factor,
        random_points,
        seed,
    };
    py.detach(|| verify_bundle(&bundle.inner, &opts))
        .map(|inner| Report { inner })
        .map_err(value_err)
}

/// `min(eps/3, 1/sum d^{5/2})` over the given labels.
#[pyfunction]
fn compute_delta_m(group: &str, eps: f64, labels: Vec<String>) -> PyResult<f64> {
    let group = parse_group(group)?;
    let labels = labels
        .iter()
        .map(|s| IrrepLabel::parse(group, s))
        .collect::<Result<Vec<_>, _>>()
        .map_err(value_err)?;
    Ok(constructor::compute_delta_m(eps, &labels))
}

/// Labels of bandlimit at most `bandlimit` (`j` on su2).
#[pyfunction]
fn irreps(group: &str, bandlimit: u32) -> PyResult<Vec<String>> {
    Ok(enumerate_irreps(parse_group(group)?, bandlimit)
        .iter()
        .map(|l| l.to_string())
        .collect())
}

#[pyfunction]
fn selftest(py: Python<'_>) -> Vec<(String, bool, String)> {
    py.detach(report::run_selftest)
        .into_iter()
        .map(|c| (c.name.to_string(), c.passed, c.detail))
        .collect()
}

#[pymodule]
fn aus(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add("BUNDLE_VERSION", constructor::BUNDLE_VERSION)?;
    m.add_class::<Bundle>()?;
    m.add_class::<Record>()?;
    m.add_class::<Report>()?;
    m.add_class::<Tree>()?;
    m.add_function(wrap_pyfunction!(construct, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(compute_delta_m, m)?)?;
    m.add_function(wrap_pyfunction!(irreps, m)?)?;
    m.add_function(wrap_pyfunction!(selftest, m)?)?;
    Ok(())
}
