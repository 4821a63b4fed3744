use hepfac::{Alphabet, ScanConfig};
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyBytes, PyDict};

fn err(e: hepfac::Error) -> PyErr {
    match e {
        hepfac::Error::Io(io) => PyOSError::new_err(io.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

#[derive(FromPyObject)]
enum Pattern {
    Text(String),
    Raw(Vec<u8>),
}

impl Pattern {
    fn into_bytes(self) -> Vec<u8> {
        match self {
            Pattern::Text(s) => s.into_bytes(),
            Pattern::Raw(b) => b,
        }
    }
}

fn alphabet_from(sigma: Option<usize>, symbols: Option<Vec<u8>>) -> PyResult<Alphabet> {
    match (sigma, symbols) {
        (Some(_), Some(_)) => Err(PyValueError::new_err("pass sigma or alphabet, not both")),
        (Some(s), None) => Alphabet::standard(s).map_err(err),
        (None, Some(bytes)) => Alphabet::new(&bytes).map_err(err),
        (None, None) => Ok(Alphabet::bytes()),
    }
}

fn stage_name(stage: hepfac::Stage) -> &'static str {
    match stage {
        hepfac::Stage::Uncompressed => "uncompressed",
        hepfac::Stage::FinalMerged => "final_merged",
        hepfac::Stage::TailMerged => "tail_merged",
    }
}

/// Immutable bitmapped trie over a pattern set.
#[pyclass(module = "hepfac", frozen)]
struct Trie {
    inner: hepfac::Trie,
}

#[pymethods]
impl Trie {
    /// Builds from `str` or `bytes` patterns. `sigma` picks a standard
    /// alphabet, `alphabet` gives the symbols explicitly; default is all bytes.
    #[new]
    #[pyo3(signature = (patterns, sigma=None, alphabet=None))]
    fn new(patterns: Vec<Pattern>, sigma: Option<usize>, alphabet: Option<Vec<u8>>) -> PyResult<Self> {
        let alphabet = alphabet_from(sigma, alphabet)?;
        let patterns: Vec<Vec<u8>> = patterns.into_iter().map(Pattern::into_bytes).collect();
        let inner = hepfac::Trie::build(&patterns, &alphabet).map_err(err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn from_bytes(data: &[u8]) -> PyResult<Self> {
        hepfac::Trie::from_bytes(data).map(|inner| Self { inner }).map_err(err)
    }

    fn to_bytes<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        PyBytes::new(py, &self.inner.to_bytes())
    }

    #[getter]
    fn node_count(&self) -> usize {
        self.inner.node_count()
    }

    #[getter]
    fn sigma(&self) -> usize {
        self.inner.alphabet().size()
    }

    #[getter]
    fn stage(&self) -> &'static str {
        stage_name(self.inner.stage())
    }

    #[getter]
    fn depth_limit(&self) -> Option<usize> {
        self.inner.depth_limit()
    }

    fn patterns<'py>(&self, py: Python<'py>) -> Vec<Bound<'py, PyBytes>> {
        self.inner
            .dictionary()
            .patterns()
            .iter()
            .map(|p| PyBytes::new(py, p))
            .collect()
    }

    fn accepts(&self, prefix: Pattern) -> bool {
        self.inner.accepts(&prefix.into_bytes())
    }

    fn memory_report<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let r = self.inner.memory_report();
        let d = PyDict::new(py);
        d.set_item("node_count", r.node_count)?;
        d.set_item("bytes_per_node", r.bytes_per_node)?;
        d.set_item("total_bytes", r.total_bytes)?;
        d.set_item("mib", r.mib_display())?;
        Ok(d)
    }

    /// Returns `(trie, stats)`; `stage=1` merges final nodes only.
    #[pyo3(signature = (stage=2))]
    fn compress<'py>(&self, py: Python<'py>, stage: u8) -> PyResult<(Trie, Bound<'py, PyDict>)> {
        let (inner, s) = match stage {
            1 => hepfac::merge_final_nodes(&self.inner),
            2 => hepfac::compress(&self.inner),
            _ => return Err(PyValueError::new_err("stage must be 1 or 2")),
        }
        .map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("nodes_before", s.nodes_before)?;
        d.set_item("nodes_after_stage1", s.nodes_after_stage1)?;
        d.set_item("nodes_after_stage2", s.nodes_after_stage2)?;
        d.set_item("pattern_count", s.pattern_count)?;
        d.set_item("reduction_percent", s.reduction_percent)?;
        Ok((Trie { inner }, d))
    }

    /// Prefix trie cut at `depth`; its scans verify candidates in full.
    fn truncate(&self, depth: usize) -> PyResult<Trie> {
        let cut = hepfac::truncate(&self.inner, depth).map_err(err)?;
        Ok(Trie { inner: cut.trie })
    }

    /// All matches as `(start, length, pattern_id)`, sorted.
    #[pyo3(signature = (text, workers=1, chunk=ScanConfig::DEFAULT_CHUNK))]
    fn scan(&self, py: Python<'_>, text: &[u8], workers: usize, chunk: usize) -> PyResult<Vec<(usize, usize, u32)>> {
        let config = ScanConfig::new(workers, chunk).map_err(err)?;
        let found = py
            .detach(|| match self.inner.depth_limit() {
                Some(_) => hepfac::scan_two_stage(&self.inner, text, &config),
                None => Ok(hepfac::scan(&self.inner, text, &config)),
            })
            .map_err(err)?;
        Ok(found.into_iter().map(|m| (m.start, m.length, m.pattern_id)).collect())
    }

    fn __len__(&self) -> usize {
        self.inner.node_count()
    }

    fn __repr__(&self) -> String {
        format!(
            "Trie(nodes={}, patterns={}, sigma={}, stage={})",
            self.inner.node_count(),
            self.inner.dictionary().len(),
            self.inner.alphabet().size(),
            stage_name(self.inner.stage())
        )
    }
}

#[pyclass(module = "hepfac")]
struct Mt19937 {
    inner: hepfac::Mt19937,
}

#[pymethods]
impl Mt19937 {
    #[new]
    #[pyo3(signature = (seed=5489))]
    fn new(seed: u32) -> Self {
        Self {
            inner: hepfac::Mt19937::new(seed),
        }
    }

    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn below(&mut self, bound: u32) -> PyResult<u32> {
        if bound == 0 {
            return Err(PyValueError::new_err("bound must be positive"));
        }
        Ok(self.inner.below(bound))
    }
}

#[pyfunction]
fn gen_patterns<'py>(
    py: Python<'py>,
    seed: u32,
    sigma: usize,
    count: usize,
    length: usize,
) -> PyResult<Vec<Bound<'py, PyBytes>>> {
    let set = hepfac::gen_patterns(seed, sigma, count, length).map_err(err)?;
    Ok(set.patterns().iter().map(|p| PyBytes::new(py, p)).collect())
}

#[pyfunction]
fn gen_corpus<'py>(py: Python<'py>, seed: u32, sigma: usize, size: usize) -> PyResult<Bound<'py, PyBytes>> {
    let text = hepfac::gen_corpus(seed, sigma, size).map_err(err)?;
    Ok(PyBytes::new(py, &text))
}

#[pyfunction]
fn dataset_digest(data: &[u8]) -> String {
    hepfac::dataset_digest(data)
}

#[pyfunction]
fn minimal_unique_prefix(patterns: Vec<Pattern>) -> usize {
    let patterns: Vec<Vec<u8>> = patterns.into_iter().map(Pattern::into_bytes).collect();
    hepfac::minimal_unique_prefix(&patterns)
}

#[pyfunction]
#[pyo3(signature = (sigmas, pattern_count=100, pattern_length=20, trials=100, seed=1))]
fn analyze_prefix_vs_alphabet<'py>(
    py: Python<'py>,
    sigmas: Vec<usize>,
    pattern_count: usize,
    pattern_length: usize,
    trials: usize,
    seed: u32,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let rows = hepfac::analyze_prefix_vs_alphabet(&sigmas, pattern_count, pattern_length, trials, seed).map_err(err)?;
    rows.into_iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("sigma", r.sigma)?;
            d.set_item("mean_depth", r.mean_depth_over_trials)?;
            d.set_item("std_error", r.std_error)?;
            d.set_item("min_depth", r.min_unique_depth)?;
            d.set_item("max_depth", r.max_unique_depth)?;
            d.set_item("trials", r.trials)?;
            Ok(d)
        })
        .collect()
}

#[pyfunction]
fn compare_footprint<'py>(py: Python<'py>, node_count: usize, sigma: usize) -> PyResult<Bound<'py, PyDict>> {
    let r = hepfac::bench::compare_footprint(node_count, sigma).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("ours_bytes", r.ours_bytes)?;
    d.set_item("pfac_bytes", r.pfac_bytes)?;
    d.set_item("accw_bytes", r.accw_bytes)?;
    d.set_item("gravity_bytes", r.gravity_bytes)?;
    d.set_item("pfac_ratio", r.pfac_ratio())?;
    d.set_item("accw_ratio", r.accw_ratio())?;
    d.set_item("gravity_ratio", r.gravity_ratio())?;
    Ok(d)
}

#[pyfunction]
fn expected_reduced_length_formula(sigma: u64, n: u64) -> f64 {
    hepfac::expected_reduced_length_formula(sigma, n)
}

/// Monte-Carlo estimate; returns `(mean, standard_error)`.
#[pyfunction]
#[pyo3(signature = (sigma, n, trials=10_000, seed=1))]
fn expected_reduced_length_oracle(py: Python<'_>, sigma: u64, n: u64, trials: u64, seed: u32) -> PyResult<(f64, f64)> {
    let r = py
        .detach(|| hepfac::expected_reduced_length_oracle(sigma, n, trials, seed))
        .map_err(err)?;
    Ok((r.expected_length, r.std_error))
}

#[pymodule]
#[pyo3(name = "hepfac")]
fn hepfac_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Trie>()?;
    m.add_class::<Mt19937>()?;
    m.add_function(wrap_pyfunction!(gen_patterns, m)?)?;
    m.add_function(wrap_pyfunction!(gen_corpus, m)?)?;
    m.add_function(wrap_pyfunction!(dataset_digest, m)?)?;
    m.add_function(wrap_pyfunction!(minimal_unique_prefix, m)?)?;
    m.add_function(wrap_pyfunction!(analyze_prefix_vs_alphabet, m)?)?;
    m.add_function(wrap_pyfunction!(compare_footprint, m)?)?;
    m.add_function(wrap_pyfunction!(expected_reduced_length_formula, m)?)?;
    m.add_function(wrap_pyfunction!(expected_reduced_length_oracle, m)?)?;
    Ok(())
}
