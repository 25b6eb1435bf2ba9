use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use hetnet_core::harness::{self, ExperimentConfig, ExperimentKind};
use hetnet_core::netgen::{FixedBetaTable, PathlossKind, ScheduledLinks};
use hetnet_core::precoder::PrecoderKind;
use hetnet_core::rates::asymptotic::{asymptotic_rates, ScalingLaw};
use hetnet_core::rates::power::{required_power as solve_power, PowerProblem};
use hetnet_core::rates::{bound, mc_rates};
use hetnet_core::scenario::{PowerConfig, Scenario as CoreScenario};
use hetnet_core::training::{self, build_pilots};
use hetnet_core::Error;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Config(_) | Error::Domain(_) => PyValueError::new_err(e.to_string()),
        Error::Io { .. } => PyIOError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn precoder(kind: &str) -> PyResult<PrecoderKind> {
    match kind {
        "mrt" => Ok(PrecoderKind::Mrt),
        "zft" => Ok(PrecoderKind::Zft),
        _ => Err(PyValueError::new_err(format!("unknown precoder '{kind}', expected 'mrt' or 'zft'"))),
    }
}

type PerUser = (Vec<f64>, Vec<Vec<f64>>);

/// Pilot groups A_r as 1-based SC indices.
#[pyfunction]
fn pilot_groups(s: usize, gamma: usize) -> PyResult<Vec<Vec<usize>>> {
    let g = training::pilot_groups(s, gamma).map_err(py_err)?;
    Ok(g.into_iter().map(|set| set.into_iter().map(|m| m + 1).collect()).collect())
}

/// Pathloss in dB for a "macro" or "sc" link of `d_km` kilometres.
#[pyfunction]
fn pathloss_db(kind: &str, d_km: f64) -> PyResult<f64> {
    let k = match kind {
        "macro" => PathlossKind::Macro,
        "sc" => PathlossKind::SmallCell,
        _ => return Err(PyValueError::new_err(format!("unknown pathloss kind '{kind}'"))),
    };
    hetnet_core::netgen::pathloss_db(k, d_km).map_err(py_err)
}

#[pyclass(module = "hetnet")]
struct Config {
    inner: ExperimentConfig,
}

#[pymethods]
impl Config {
    /// Defaults, or the given TOML text.
    #[new]
    #[pyo3(signature = (toml = ""))]
    fn new(toml: &str) -> PyResult<Self> {
        Ok(Config { inner: ExperimentConfig::from_toml(toml).map_err(py_err)? })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Config { inner: harness::load_config(&path).map_err(py_err)? })
    }

    fn to_toml(&self) -> String {
        self.inner.to_toml()
    }

    #[getter]
    fn experiment(&self) -> &'static str {
        self.inner.experiment.name()
    }

    #[setter]
    fn set_experiment(&mut self, name: &str) -> PyResult<()> {
        self.inner.experiment = name.parse::<ExperimentKind>().map_err(py_err)?;
        Ok(())
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.mc.seed
    }

    #[setter]
    fn set_seed(&mut self, v: u64) {
        self.inner.mc.seed = v;
    }

    #[getter]
    fn trials(&self) -> usize {
        self.inner.mc.trials
    }

    #[setter]
    fn set_trials(&mut self, v: usize) {
        self.inner.mc.trials = v;
    }

    #[getter]
    fn workers(&self) -> usize {
        self.inner.mc.workers
    }

    #[setter]
    fn set_workers(&mut self, v: usize) {
        self.inner.mc.workers = v;
    }

    #[getter]
    fn drops(&self) -> usize {
        self.inner.mc.drops
    }

    #[setter]
    fn set_drops(&mut self, v: usize) {
        self.inner.mc.drops = v;
    }

    /// Training length τ.
    #[getter]
    fn tau(&self) -> usize {
        self.inner.tau()
    }

    /// Derived quantities as a JSON string.
    fn derived_json(&self) -> String {
        serde_json::to_string(&self.inner.derived()).expect("derived quantities serialize")
    }

    fn __repr__(&self) -> String {
        format!("Config(experiment='{}', seed={}, trials={})", self.experiment(), self.seed(), self.trials())
    }
}

#[pyclass(module = "hetnet")]
struct Table {
    inner: harness::ResultTable,
}

#[pymethods]
impl Table {
    /// CSV header, sweep column first.
    #[getter]
    fn header(&self) -> Vec<String> {
        harness::output::header(&self.inner)
    }

    #[getter]
    fn sweep_values(&self) -> Vec<f64> {
        self.inner.rows.iter().map(|r| r.sweep_value).collect()
    }

    #[getter]
    fn feasible(&self) -> Vec<bool> {
        self.inner.rows.iter().map(|r| r.feasible).collect()
    }

    fn column(&self, name: &str) -> PyResult<Vec<f64>> {
        self.inner
            .column(name)
            .ok_or_else(|| PyValueError::new_err(format!("no column '{name}'")))
    }

    fn write_csv(&self, path: PathBuf) -> PyResult<()> {
        harness::write_csv(&self.inner, &path).map_err(py_err)
    }

    fn __len__(&self) -> usize {
        self.inner.rows.len()
    }
}

/// Runs the configured sweep; the GIL is released meanwhile.
#[pyfunction]
fn run_experiment(py: Python<'_>, config: &Config) -> PyResult<Table> {
    let cfg = config.inner.clone();
    let inner = py.detach(move || harness::run_experiment(&cfg)).map_err(py_err)?;
    Ok(Table { inner })
}

/// A scheduled downlink instance with linear powers.
#[pyclass(module = "hetnet")]
struct Scenario {
    inner: CoreScenario,
}

#[pymethods]
impl Scenario {
    /// K MUEs, S SCs with L SUEs each, every β taken from the fixed table.
    #[staticmethod]
    #[pyo3(signature = (k, l, s, gamma, n_bs, n_sc, p_bs, p_sc, p_tau, sigma0_sq = 1.0))]
    #[allow(clippy::too_many_arguments)]
    fn fixed_table(
        k: usize,
        l: usize,
        s: usize,
        gamma: usize,
        n_bs: usize,
        n_sc: usize,
        p_bs: f64,
        p_sc: f64,
        p_tau: f64,
        sigma0_sq: f64,
    ) -> PyResult<Self> {
        let table = FixedBetaTable { sigma0_sq, ..FixedBetaTable::default() };
        let links = ScheduledLinks::fixed_table(&table, k, l, s);
        let plan = build_pilots(k, l, s, gamma).map_err(py_err)?;
        let powers = PowerConfig::uniform(p_bs, p_sc, s, p_tau, sigma0_sq);
        let inner = CoreScenario::new(links, plan, powers, n_bs, n_sc).map_err(py_err)?;
        Ok(Scenario { inner })
    }

    #[getter]
    fn tau(&self) -> usize {
        self.inner.plan.tau
    }

    /// Closed-form lower bounds as (MUE rates, SUE rates per SC).
    fn bound(&self, kind: &str) -> PyResult<PerUser> {
        let r = bound(precoder(kind)?, &self.inner).map_err(py_err)?.rates;
        Ok((r.mue, r.sue))
    }

    /// Monte-Carlo means and standard errors as ((MUE, SUE), (MUE, SUE)).
    #[pyo3(signature = (kind, trials, seed = 0))]
    fn monte_carlo(&self, py: Python<'_>, kind: &str, trials: usize, seed: u64) -> PyResult<(PerUser, PerUser)> {
        let kind = precoder(kind)?;
        let sc = &self.inner;
        let r = py.detach(|| mc_rates(sc, kind, trials, seed, &[])).map_err(py_err)?;
        let mean = (r.mue.iter().map(|e| e.mean).collect(), r.sue.iter().map(|c| c.iter().map(|e| e.mean).collect()).collect());
        let se = (r.mue.iter().map(|e| e.stderr).collect(), r.sue.iter().map(|c| c.iter().map(|e| e.stderr).collect()).collect());
        Ok((mean, se))
    }

    /// Large-array limits under a case I (`theta = 0`) or case II law; +inf marks
    /// divergence and 0 a vanishing rate.
    #[pyo3(signature = (kind, chi = 1.0, eta = 1.0, theta = 0.0, lam = 10.0))]
    fn asymptotic(&self, kind: &str, chi: f64, eta: f64, theta: f64, lam: f64) -> PyResult<PerUser> {
        let law = law(theta, chi, eta, lam);
        let sc = &self.inner;
        let r = asymptotic_rates(&sc.links, &sc.plan, &law, precoder(kind)?, sc.powers.sigma0_sq).map_err(py_err)?;
        Ok((
            r.mue.iter().map(|l| l.value()).collect(),
            r.sue.iter().map(|c| c.iter().map(|l| l.value()).collect()).collect(),
        ))
    }
}

fn law(theta: f64, chi: f64, eta: f64, lam: f64) -> ScalingLaw {
    if theta > 0.0 {
        ScalingLaw::case_two(theta, chi, eta, lam)
    } else {
        ScalingLaw::case_one(chi, eta, lam)
    }
}

/// Required (p_BS, p_SC) in dB per N_SC on the fixed-β table; NaN where unreachable.
#[pyfunction]
#[pyo3(signature = (target, gamma, kind, n_sc, k = 20, l = 4, s = 8, theta = 0.0, chi = 1.0, eta = 1.0, lam = 10.0, coherence = Some(200)))]
#[allow(clippy::too_many_arguments)]
fn required_power(
    target: f64,
    gamma: usize,
    kind: &str,
    n_sc: Vec<usize>,
    k: usize,
    l: usize,
    s: usize,
    theta: f64,
    chi: f64,
    eta: f64,
    lam: f64,
    coherence: Option<usize>,
) -> PyResult<Vec<(f64, f64)>> {
    let problem = PowerProblem {
        target,
        law: law(theta, chi, eta, lam),
        table: FixedBetaTable::default(),
        k,
        l,
        s,
        gamma,
        kind: precoder(kind)?,
        coherence,
    };
    let r = solve_power(&problem, &n_sc).map_err(py_err)?;
    Ok(r.iter().map(|p| (p.p_bs_dbm, p.p_sc_dbm)).collect())
}

#[pymodule]
fn hetnet(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<Config>()?;
    m.add_class::<Table>()?;
    m.add_class::<Scenario>()?;
    m.add_function(wrap_pyfunction!(pilot_groups, m)?)?;
    m.add_function(wrap_pyfunction!(pathloss_db, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(required_power, m)?)?;
    Ok(())
}
