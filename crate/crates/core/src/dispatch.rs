//! Mode selection, environment configuration, GEMM entry points and
//! operation counters.

use std::collections::HashMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, OnceLock};
use std::time::Instant;

use num_complex::Complex64;

use crate::backend::{IntegerBackend, ReferenceBackend};
use crate::error::{EmuError, Result};
use crate::matrix::{ComplexMatrix, Matrix};
use crate::ozaki1::{ozaki1_gemm, ProductStrategy, MAX_SLICES};
use crate::ozaki2::{ozaki2_gemm, MAX_MODULI};
use crate::zgemm::complex_gemm;

pub const ENV_MODE: &str = "GEMM_EMU_MODE";
pub const ENV_SLICES: &str = "GEMM_EMU_SLICES";
pub const ENV_STRATEGY: &str = "GEMM_EMU_STRATEGY";
pub const ENV_MODULI: &str = "GEMM_EMU_MODULI";
pub const ENV_STATS: &str = "GEMM_EMU_STATS";

pub const DEFAULT_SLICES: usize = 7;
pub const DEFAULT_MODULI: usize = 16;

/// How a real FP64 product is computed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum EmulationMode {
    #[default]
    Native,
    Ozaki1 {
        slices: usize,
        strategy: ProductStrategy,
    },
    Ozaki2 {
        moduli: usize,
    },
}

impl EmulationMode {
    pub fn ozaki1(slices: usize) -> Self {
        EmulationMode::Ozaki1 { slices, strategy: ProductStrategy::Eager }
    }

    pub fn ozaki2(moduli: usize) -> Self {
        EmulationMode::Ozaki2 { moduli }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            EmulationMode::Native => Ok(()),
            EmulationMode::Ozaki1 { slices, .. } if (1..=MAX_SLICES).contains(&slices) => Ok(()),
            EmulationMode::Ozaki2 { moduli } if (1..=MAX_MODULI).contains(&moduli) => Ok(()),
            other => Err(EmuError::InvalidParameter(format!("mode {other} out of range"))),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            EmulationMode::Native => "native",
            EmulationMode::Ozaki1 { .. } => "ozaki1",
            EmulationMode::Ozaki2 { .. } => "ozaki2",
        }
    }

    /// Slices or moduli; 0 for native.
    pub fn param(&self) -> usize {
        match *self {
            EmulationMode::Native => 0,
            EmulationMode::Ozaki1 { slices, .. } => slices,
            EmulationMode::Ozaki2 { moduli } => moduli,
        }
    }

    /// Advertised significand width of slice modes.
    pub fn mantissa_bits(&self) -> Option<u32> {
        match *self {
            EmulationMode::Ozaki1 { slices, .. } => Some(crate::ozaki1::mantissa_bits(slices)),
            _ => None,
        }
    }

    /// Low-precision GEMMs per real GEMM.
    pub fn backend_gemms_per_real(&self) -> u64 {
        match *self {
            EmulationMode::Native => 0,
            EmulationMode::Ozaki1 { slices, strategy } => strategy.pair_count(slices) as u64,
            EmulationMode::Ozaki2 { moduli } => moduli as u64,
        }
    }
}

impl fmt::Display for EmulationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            EmulationMode::Native => write!(f, "native"),
            EmulationMode::Ozaki1 { slices, strategy: ProductStrategy::Eager } => write!(f, "ozaki1:{slices}"),
            EmulationMode::Ozaki1 { slices, strategy } => write!(f, "ozaki1:{slices}:{}", strategy.name()),
            EmulationMode::Ozaki2 { moduli } => write!(f, "ozaki2:{moduli}"),
        }
    }
}

impl FromStr for EmulationMode {
    type Err = EmuError;

    /// Parses `native`, `ozaki1:S[:eager|full]` or `ozaki2:M`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || EmuError::InvalidParameter(format!("unrecognized mode {s:?}"));
        let parts: Vec<&str> = s.trim().split(':').collect();
        let num = |p: &str| p.parse::<usize>().map_err(|_| bad());
        let mode = match parts.as_slice() {
            [m] if m.eq_ignore_ascii_case("native") => EmulationMode::Native,
            [m, n] if m.eq_ignore_ascii_case("ozaki1") => EmulationMode::ozaki1(num(n)?),
            [m, n, st] if m.eq_ignore_ascii_case("ozaki1") => {
                EmulationMode::Ozaki1 { slices: num(n)?, strategy: st.parse()? }
            }
            [m, n] if m.eq_ignore_ascii_case("ozaki2") => EmulationMode::ozaki2(num(n)?),
            _ => return Err(bad()),
        };
        mode.validate()?;
        Ok(mode)
    }
}

/// Mode and stats destination read from the environment.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RuntimeConfig {
    pub mode: EmulationMode,
    pub stats_path: Option<PathBuf>,
}

fn config_error(var: &str, value: &str) -> EmuError {
    EmuError::Config { var: var.to_string(), value: value.to_string() }
}

fn env_count(
    env: &HashMap<String, String>,
    var: &str,
    default: usize,
    range: std::ops::RangeInclusive<usize>,
) -> Result<usize> {
    match env.get(var).map(|v| v.trim()) {
        None | Some("") => Ok(default),
        Some(v) => match v.parse::<usize>() {
            Ok(n) if range.contains(&n) => Ok(n),
            _ => Err(config_error(var, v)),
        },
    }
}

/// Mode selected by the `GEMM_EMU_*` variables in `env`. Unset means native.
pub fn parse_mode_config(env: &HashMap<String, String>) -> Result<EmulationMode> {
    let mode = env.get(ENV_MODE).map(|v| v.trim().to_ascii_lowercase()).unwrap_or_default();
    match mode.as_str() {
        "" | "native" => Ok(EmulationMode::Native),
        "ozaki1" => {
            let slices = env_count(env, ENV_SLICES, DEFAULT_SLICES, 1..=MAX_SLICES)?;
            let strategy = match env.get(ENV_STRATEGY).map(|v| v.trim()) {
                None | Some("") => ProductStrategy::Eager,
                Some(v) => v.parse().map_err(|_| config_error(ENV_STRATEGY, v))?,
            };
            Ok(EmulationMode::Ozaki1 { slices, strategy })
        }
        "ozaki2" => Ok(EmulationMode::ozaki2(env_count(env, ENV_MODULI, DEFAULT_MODULI, 1..=MAX_MODULI)?)),
        _ => Err(config_error(ENV_MODE, env.get(ENV_MODE).map(String::as_str).unwrap_or_default())),
    }
}

pub fn parse_runtime_config(env: &HashMap<String, String>) -> Result<RuntimeConfig> {
    let mode = parse_mode_config(env)?;
    let stats_path = env.get(ENV_STATS).map(|v| v.trim()).filter(|v| !v.is_empty()).map(PathBuf::from);
    Ok(RuntimeConfig { mode, stats_path })
}

/// Snapshot of the dispatch counters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct GemmStats {
    pub real_calls: u64,
    pub complex_calls: u64,
    pub backend_gemms: u64,
    pub elements_quantized: u64,
    pub elements_flushed: u64,
    pub nonfinite_fallbacks: u64,
    pub native_ns: u64,
    pub ozaki1_ns: u64,
    pub ozaki2_ns: u64,
}

const STAT_KEYS: [&str; 9] = [
    "real_calls",
    "complex_calls",
    "backend_gemms",
    "elements_quantized",
    "elements_flushed",
    "nonfinite_fallbacks",
    "native_ns",
    "ozaki1_ns",
    "ozaki2_ns",
];

impl GemmStats {
    fn fields(&self) -> [u64; 9] {
        [
            self.real_calls,
            self.complex_calls,
            self.backend_gemms,
            self.elements_quantized,
            self.elements_flushed,
            self.nonfinite_fallbacks,
            self.native_ns,
            self.ozaki1_ns,
            self.ozaki2_ns,
        ]
    }

    fn fields_mut(&mut self) -> [&mut u64; 9] {
        [
            &mut self.real_calls,
            &mut self.complex_calls,
            &mut self.backend_gemms,
            &mut self.elements_quantized,
            &mut self.elements_flushed,
            &mut self.nonfinite_fallbacks,
            &mut self.native_ns,
            &mut self.ozaki1_ns,
            &mut self.ozaki2_ns,
        ]
    }

    pub fn wall_ns(&self) -> u64 {
        self.native_ns + self.ozaki1_ns + self.ozaki2_ns
    }

    /// Counter-wise `self - earlier`.
    pub fn since(&self, earlier: &GemmStats) -> GemmStats {
        let mut out = GemmStats::default();
        for ((o, a), b) in out.fields_mut().into_iter().zip(self.fields()).zip(earlier.fields()) {
            *o = a.saturating_sub(b);
        }
        out
    }

    /// `key=value` lines, one counter per line.
    pub fn to_key_values(&self) -> String {
        STAT_KEYS.iter().zip(self.fields()).map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    /// Parses [`GemmStats::to_key_values`] output; unknown keys are ignored.
    pub fn from_key_values(text: &str) -> Result<Self> {
        let mut out = GemmStats::default();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| EmuError::InvalidParameter(format!("malformed stats line {line:?}")))?;
            if let Some(idx) = STAT_KEYS.iter().position(|k| *k == key) {
                *out.fields_mut()[idx] =
                    value.parse().map_err(|_| EmuError::InvalidParameter(format!("malformed stats value {line:?}")))?;
            }
        }
        Ok(out)
    }
}

/// Monotonic atomic counters shared by dispatchers.
#[derive(Debug, Default)]
pub struct StatsCounters {
    real_calls: AtomicU64,
    complex_calls: AtomicU64,
    backend_gemms: AtomicU64,
    elements_quantized: AtomicU64,
    elements_flushed: AtomicU64,
    nonfinite_fallbacks: AtomicU64,
    native_ns: AtomicU64,
    ozaki1_ns: AtomicU64,
    ozaki2_ns: AtomicU64,
}

impl StatsCounters {
    pub fn snapshot(&self) -> GemmStats {
        let ld = |c: &AtomicU64| c.load(Ordering::Relaxed);
        GemmStats {
            real_calls: ld(&self.real_calls),
            complex_calls: ld(&self.complex_calls),
            backend_gemms: ld(&self.backend_gemms),
            elements_quantized: ld(&self.elements_quantized),
            elements_flushed: ld(&self.elements_flushed),
            nonfinite_fallbacks: ld(&self.nonfinite_fallbacks),
            native_ns: ld(&self.native_ns),
            ozaki1_ns: ld(&self.ozaki1_ns),
            ozaki2_ns: ld(&self.ozaki2_ns),
        }
    }

    fn add(counter: &AtomicU64, v: u64) {
        counter.fetch_add(v, Ordering::Relaxed);
    }
}

/// Plain FP64 product, summing over `k` in ascending order for every entry.
pub fn native_gemm(a: &Matrix, b: &Matrix) -> Matrix {
    assert_eq!(a.cols(), b.rows(), "native gemm shape mismatch");
    let (m, k, n) = (a.rows(), a.cols(), b.cols());
    let mut c = Matrix::zeros(m, n);
    let (av, cv) = (a.as_slice(), c.as_mut_slice());
    for j in 0..n {
        let cj = &mut cv[j * m..(j + 1) * m];
        for p in 0..k {
            let bpj = b[(p, j)];
            let ap = &av[p * m..(p + 1) * m];
            for (ci, &ai) in cj.iter_mut().zip(ap) {
                *ci += ai * bpj;
            }
        }
    }
    c
}

fn check_shapes(a: (usize, usize), b: (usize, usize), c: (usize, usize)) -> Result<()> {
    if a.1 != b.0 || c != (a.0, b.1) {
        return Err(EmuError::DimensionMismatch(format!(
            "C({}x{}) = A({}x{}) * B({}x{})",
            c.0, c.1, a.0, a.1, b.0, b.1
        )));
    }
    Ok(())
}

/// Routes GEMMs to one emulation mode and records what it did.
#[derive(Clone)]
pub struct Dispatcher {
    mode: EmulationMode,
    stats: Arc<StatsCounters>,
    backend: Arc<dyn IntegerBackend>,
}

impl fmt::Debug for Dispatcher {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Dispatcher").field("mode", &self.mode).field("stats", &self.stats()).finish()
    }
}

impl Dispatcher {
    /// A dispatcher with its own fresh counters.
    pub fn new(mode: EmulationMode) -> Result<Self> {
        Self::with_stats(mode, Arc::new(StatsCounters::default()))
    }

    pub fn with_stats(mode: EmulationMode, stats: Arc<StatsCounters>) -> Result<Self> {
        mode.validate()?;
        Ok(Self { mode, stats, backend: Arc::new(ReferenceBackend) })
    }

    pub fn with_backend(mut self, backend: Arc<dyn IntegerBackend>) -> Self {
        self.backend = backend;
        self
    }

    pub fn mode(&self) -> EmulationMode {
        self.mode
    }

    pub fn stats(&self) -> GemmStats {
        self.stats.snapshot()
    }

    pub fn counters(&self) -> &Arc<StatsCounters> {
        &self.stats
    }

    fn timed<T>(&self, mode: EmulationMode, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        let ns = start.elapsed().as_nanos() as u64;
        let counter = match mode {
            EmulationMode::Native => &self.stats.native_ns,
            EmulationMode::Ozaki1 { .. } => &self.stats.ozaki1_ns,
            EmulationMode::Ozaki2 { .. } => &self.stats.ozaki2_ns,
        };
        StatsCounters::add(counter, ns);
        out
    }

    /// `a * b` under the configured mode, without call accounting.
    fn product(&self, a: &Matrix, b: &Matrix) -> Result<Matrix> {
        let backend = self.backend.as_ref();
        let result = match self.mode {
            EmulationMode::Native => return Ok(self.timed(self.mode, || native_gemm(a, b))),
            EmulationMode::Ozaki1 { slices, strategy } => {
                self.timed(self.mode, || ozaki1_gemm(a, b, slices, strategy, backend))
            }
            EmulationMode::Ozaki2 { moduli } => self.timed(self.mode, || ozaki2_gemm(a, b, moduli, backend)),
        };
        let (c, cost) = result?;
        StatsCounters::add(&self.stats.backend_gemms, cost.backend_gemms);
        StatsCounters::add(&self.stats.elements_quantized, cost.elements_quantized);
        StatsCounters::add(&self.stats.elements_flushed, cost.elements_flushed);
        Ok(c)
    }

    /// Emulated `a * b`; non-finite operands fall back to native for this call.
    pub fn gemm(&self, a: &Matrix, b: &Matrix) -> Result<Matrix> {
        if a.cols() != b.rows() {
            return Err(EmuError::DimensionMismatch(format!(
                "gemm {}x{} times {}x{}",
                a.rows(),
                a.cols(),
                b.rows(),
                b.cols()
            )));
        }
        StatsCounters::add(&self.stats.real_calls, 1);
        if self.mode != EmulationMode::Native && !(a.is_finite() && b.is_finite()) {
            StatsCounters::add(&self.stats.nonfinite_fallbacks, 1);
            return Ok(self.timed(EmulationMode::Native, || native_gemm(a, b)));
        }
        self.product(a, b)
    }

    /// Emulated complex `a * b` through four real products.
    pub fn zgemm(&self, a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
        if a.cols() != b.rows() {
            return Err(EmuError::DimensionMismatch(format!(
                "zgemm {}x{} times {}x{}",
                a.rows(),
                a.cols(),
                b.rows(),
                b.cols()
            )));
        }
        StatsCounters::add(&self.stats.complex_calls, 1);
        if self.mode != EmulationMode::Native && !(a.is_finite() && b.is_finite()) {
            StatsCounters::add(&self.stats.nonfinite_fallbacks, 1);
            return self.timed(EmulationMode::Native, || complex_gemm(a, b, |x, y| Ok(native_gemm(x, y))));
        }
        complex_gemm(a, b, |x, y| self.product(x, y))
    }

    /// `c <- alpha * a * b + beta * c`; the scaling is plain FP64.
    pub fn gemm_update(&self, alpha: f64, a: &Matrix, b: &Matrix, beta: f64, c: &mut Matrix) -> Result<()> {
        check_shapes((a.rows(), a.cols()), (b.rows(), b.cols()), (c.rows(), c.cols()))?;
        if alpha == 0.0 || a.cols() == 0 {
            scale_real(beta, c);
            return Ok(());
        }
        let p = self.gemm(a, b)?;
        for (ci, &pi) in c.as_mut_slice().iter_mut().zip(p.as_slice()) {
            let t = alpha * pi;
            *ci = if beta == 0.0 {
                t
            } else if t == 0.0 {
                if beta == 1.0 {
                    *ci
                } else {
                    beta * *ci
                }
            } else {
                t + beta * *ci
            };
        }
        Ok(())
    }

    /// Complex counterpart of [`Dispatcher::gemm_update`].
    pub fn zgemm_update(
        &self,
        alpha: Complex64,
        a: &ComplexMatrix,
        b: &ComplexMatrix,
        beta: Complex64,
        c: &mut ComplexMatrix,
    ) -> Result<()> {
        check_shapes((a.rows(), a.cols()), (b.rows(), b.cols()), (c.rows(), c.cols()))?;
        let zero = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        if alpha == zero || a.cols() == 0 {
            scale_complex(beta, c);
            return Ok(());
        }
        let p = self.zgemm(a, b)?;
        for (ci, &pi) in c.as_mut_slice().iter_mut().zip(p.as_slice()) {
            let t = if alpha == one { pi } else { alpha * pi };
            *ci = if beta == zero {
                t
            } else if t == zero {
                if beta == one {
                    *ci
                } else {
                    beta * *ci
                }
            } else if beta == one {
                t + *ci
            } else {
                t + beta * *ci
            };
        }
        Ok(())
    }
}

fn scale_real(beta: f64, c: &mut Matrix) {
    if beta == 1.0 {
        return;
    }
    for x in c.as_mut_slice() {
        *x = if beta == 0.0 { 0.0 } else { beta * *x };
    }
}

fn scale_complex(beta: Complex64, c: &mut ComplexMatrix) {
    if beta == Complex64::new(1.0, 0.0) {
        return;
    }
    for x in c.as_mut_slice() {
        *x = if beta == Complex64::new(0.0, 0.0) { Complex64::new(0.0, 0.0) } else { beta * *x };
    }
}

fn global_counters() -> &'static Arc<StatsCounters> {
    static GLOBAL: OnceLock<Arc<StatsCounters>> = OnceLock::new();
    GLOBAL.get_or_init(|| Arc::new(StatsCounters::default()))
}

/// `c <- alpha * a * b + beta * c` under `mode`, counted in the process-wide stats.
pub fn gemm_dispatch(mode: EmulationMode, alpha: f64, a: &Matrix, b: &Matrix, beta: f64, c: &mut Matrix) -> Result<()> {
    Dispatcher::with_stats(mode, global_counters().clone())?.gemm_update(alpha, a, b, beta, c)
}

/// Complex counterpart of [`gemm_dispatch`].
pub fn zgemm_dispatch(
    mode: EmulationMode,
    alpha: Complex64,
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    beta: Complex64,
    c: &mut ComplexMatrix,
) -> Result<()> {
    Dispatcher::with_stats(mode, global_counters().clone())?.zgemm_update(alpha, a, b, beta, c)
}

/// Process-wide counters.
pub fn stats_snapshot() -> GemmStats {
    global_counters().snapshot()
}

/// Process configuration, read from the environment on first use.
///
/// A malformed configuration is reported once on stderr and replaced by
/// native mode, since BLAS callers have no error channel.
pub fn runtime_config() -> &'static RuntimeConfig {
    static CONFIG: OnceLock<RuntimeConfig> = OnceLock::new();
    CONFIG.get_or_init(|| {
        let env: HashMap<String, String> = std::env::vars().filter(|(k, _)| k.starts_with("GEMM_EMU_")).collect();
        let config = match parse_runtime_config(&env) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("ozgemm: {e}; using native GEMM");
                RuntimeConfig {
                    mode: EmulationMode::Native,
                    stats_path: env.get(ENV_STATS).filter(|v| !v.is_empty()).map(PathBuf::from),
                }
            }
        };
        if config.stats_path.is_some() {
            // SAFETY: registering a plain extern "C" function with no captured state.
            unsafe {
                libc::atexit(dump_stats_at_exit);
            }
        }
        config
    })
}

/// The environment-configured dispatcher, sharing the process-wide counters.
pub fn global_dispatcher() -> &'static Dispatcher {
    static DISPATCHER: OnceLock<Dispatcher> = OnceLock::new();
    DISPATCHER.get_or_init(|| {
        Dispatcher::with_stats(runtime_config().mode, global_counters().clone()).expect("validated mode")
    })
}

/// Writes the process-wide stats to the configured path, if any.
pub fn write_stats_file() -> std::io::Result<()> {
    let config = runtime_config();
    if let Some(path) = &config.stats_path {
        let mut text = format!("mode={}\n", config.mode);
        text.push_str(&stats_snapshot().to_key_values());
        std::fs::write(path, text)?;
    }
    Ok(())
}

extern "C" fn dump_stats_at_exit() {
    if let Err(e) = write_stats_file() {
        eprintln!("ozgemm: cannot write stats file: {e}");
    }
}
