//! Flat `key = value` scenario files. `#` starts a comment, vectors are
//! comma-separated, complex literals look like `4i`, `1+2i`, `-0.5-3i`.
//! Parsing applies defaults (hbar = 1, gamma0 = unit-norm,
//! sample_stride = 10), rejects unknown and duplicate keys, and validates
//! every cross-field invariant it can see without running anything.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    /// The text itself is malformed (bad line shape, bad literal).
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    /// The text is well formed but describes an invalid scenario.
    #[error("key '{key}': {message}")]
    Validation { key: String, message: String },
}

pub type Result<T> = std::result::Result<T, ScenarioError>;

fn parse_err(line: usize, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Parse { line, message: message.into() }
}

fn invalid(key: impl Into<String>, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Validation { key: key.into(), message: message.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Gwd,
    Grid,
    Compare,
    Analytic,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Gwd => "gwd",
            Mode::Grid => "grid",
            Mode::Compare => "compare",
            Mode::Analytic => "analytic",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "gwd" => Some(Mode::Gwd),
            "grid" => Some(Mode::Grid),
            "compare" => Some(Mode::Compare),
            "analytic" => Some(Mode::Analytic),
            _ => None,
        }
    }
}

/// Policy for the initial phase/normalization parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gamma0 {
    /// Im gamma chosen so the initial packet has unit norm, Re gamma = 0.
    UnitNorm,
    Zero,
    Explicit(Complex64),
}

/// Potential exactly as written in the file; conversion to polynomial terms
/// happens at run time. Keeping the written form makes print/parse a strict
/// round trip.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSpec {
    None,
    /// 1D dense power list: coeffs[k] multiplies x^k.
    Coeffs(Vec<f64>),
    /// Sparse monomials (powers per dimension, coefficient).
    Terms(Vec<(Vec<u32>, f64)>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Center {
    /// Midpoint of the packet center's travel, from a dynamics pre-pass.
    Auto,
    At(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Crank-Nicolson unless b vanishes identically.
    Auto,
    Spectral,
    Cn,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Auto => "auto",
            Scheme::Spectral => "spectral",
            Scheme::Cn => "cn",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub n: usize,
    pub length: f64,
    pub center: Center,
    pub scheme: Scheme,
    /// Optional smooth high-wavenumber mask (kappa_c, width) for the
    /// spectral scheme; off by default.
    pub mask: Option<(f64, f64)>,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { n: 4096, length: 40.0, center: Center::Auto, scheme: Scheme::Auto, mask: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Artifact {
    Trajectory,
    Density,
    GridTrajectory,
    Report,
    Analytic,
}

impl Artifact {
    pub fn name(self) -> &'static str {
        match self {
            Artifact::Trajectory => "trajectory",
            Artifact::Density => "density",
            Artifact::GridTrajectory => "grid_trajectory",
            Artifact::Report => "report",
            Artifact::Analytic => "analytic",
        }
    }

    pub fn filename(self) -> &'static str {
        match self {
            Artifact::Trajectory => "trajectory.csv",
            Artifact::Density => "density.csv",
            Artifact::GridTrajectory => "grid_trajectory.csv",
            Artifact::Report => "report.csv",
            Artifact::Analytic => "analytic.csv",
        }
    }

    fn from_name(s: &str) -> Option<Self> {
        match s {
            "trajectory" => Some(Artifact::Trajectory),
            "density" => Some(Artifact::Density),
            "grid_trajectory" => Some(Artifact::GridTrajectory),
            "report" => Some(Artifact::Report),
            "analytic" => Some(Artifact::Analytic),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub dim: usize,
    pub hbar: f64,
    pub masses: Vec<f64>,
    pub q0: Vec<f64>,
    pub p0: Vec<f64>,
    /// Row-major dim x dim complex width matrix.
    pub alpha0: Vec<Complex64>,
    pub gamma0: Gamma0,
    pub potential: PotentialSpec,
    pub b_slope: Vec<f64>,
    pub b_offset: Vec<f64>,
    pub dt: f64,
    pub t_final: f64,
    pub sample_stride: usize,
    /// Mode recorded in the file; the CLI positional always wins.
    pub mode: Option<Mode>,
    pub grid: Option<GridSpec>,
    /// Restriction of the artifacts to write; None means the mode default.
    pub outputs: Option<Vec<Artifact>>,
}

/// Complex literal: `a`, `bi`, `a+bi`, `a-bi`, with `i`, `+i`, `-i`
/// accepted for unit imaginary parts and exponent notation allowed in
/// both parts.
pub fn parse_complex(text: &str) -> std::result::Result<Complex64, String> {
    let s = text.trim();
    if s.is_empty() {
        return Err("empty complex literal".into());
    }
    let Some(body) = s.strip_suffix('i') else {
        let re: f64 = s.parse().map_err(|_| format!("bad number '{s}'"))?;
        return Ok(Complex64::new(re, 0.0));
    };
    // Split real and imaginary parts at the last sign that is not an
    // exponent sign; no such sign means the literal is purely imaginary.
    let bytes = body.as_bytes();
    let mut split = None;
    for idx in (1..bytes.len()).rev() {
        let ch = bytes[idx] as char;
        let prev = bytes[idx - 1] as char;
        if (ch == '+' || ch == '-') && prev != 'e' && prev != 'E' {
            split = Some(idx);
            break;
        }
    }
    let unit_or = |t: &str| -> std::result::Result<f64, String> {
        match t {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => t.parse().map_err(|_| format!("bad imaginary part '{t}'")),
        }
    };
    match split {
        Some(idx) => {
            let re_txt = body[..idx].trim();
            let re: f64 = re_txt.parse().map_err(|_| format!("bad real part '{re_txt}'"))?;
            let im = unit_or(body[idx..].trim())?;
            Ok(Complex64::new(re, im))
        }
        None => Ok(Complex64::new(0.0, unit_or(body.trim())?)),
    }
}

/// Shortest-round-trip complex rendering, inverse of `parse_complex`.
pub fn format_complex(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else if z.re == 0.0 {
        format!("{}i", z.im)
    } else if z.im < 0.0 {
        format!("{}{}i", z.re, z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}

/// Raw key/value lines with consumption tracking, so leftover keys can be
/// rejected by name after the known ones are taken.
struct RawKeys {
    entries: Vec<(String, String, usize)>,
    used: Vec<bool>,
}

impl RawKeys {
    fn scan(text: &str) -> Result<Self> {
        let mut entries: Vec<(String, String, usize)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw.find('#') {
                Some(i) => &raw[..i],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let Some(eq) = line.find('=') else {
                return Err(parse_err(line_no, "expected 'key = value'"));
            };
            let key = line[..eq].trim().to_string();
            let value = line[eq + 1..].trim().to_string();
            if key.is_empty() {
                return Err(parse_err(line_no, "empty key before '='"));
            }
            if entries.iter().any(|(k, _, _)| *k == key) {
                return Err(invalid(key, "duplicate key"));
            }
            entries.push((key, value, line_no));
        }
        let used = vec![false; entries.len()];
        Ok(Self { entries, used })
    }

    fn take(&mut self, key: &str) -> Option<(String, usize)> {
        for (i, (k, v, line)) in self.entries.iter().enumerate() {
            if k == key {
                self.used[i] = true;
                return Some((v.clone(), *line));
            }
        }
        None
    }

    fn has_prefix(&self, prefix: &str) -> bool {
        self.entries.iter().any(|(k, _, _)| k.starts_with(prefix))
    }

    fn reject_leftovers(&self) -> Result<()> {
        for (i, (k, _, _)) in self.entries.iter().enumerate() {
            if !self.used[i] {
                return Err(invalid(k.clone(), "unknown key"));
            }
        }
        Ok(())
    }
}

fn parse_f64(key: &str, value: &str, line: usize) -> Result<f64> {
    let x: f64 = value
        .parse()
        .map_err(|_| parse_err(line, format!("bad number '{value}' for {key}")))?;
    if !x.is_finite() {
        return Err(invalid(key, "must be finite"));
    }
    Ok(x)
}

fn parse_usize(key: &str, value: &str, line: usize) -> Result<usize> {
    value
        .parse()
        .map_err(|_| parse_err(line, format!("bad integer '{value}' for {key}")))
}

fn parse_f64_list(key: &str, value: &str, line: usize, want: usize) -> Result<Vec<f64>> {
    let items: Vec<f64> = value
        .split(',')
        .map(|t| parse_f64(key, t.trim(), line))
        .collect::<Result<_>>()?;
    if items.len() != want {
        return Err(invalid(key, format!("expected {want} comma-separated values, got {}", items.len())));
    }
    Ok(items)
}

fn parse_complex_list(key: &str, value: &str, line: usize, want: usize) -> Result<Vec<Complex64>> {
    let items: Vec<Complex64> = value
        .split(',')
        .map(|t| parse_complex(t).map_err(|m| parse_err(line, format!("{key}: {m}"))))
        .collect::<Result<_>>()?;
    if items.len() != want {
        return Err(invalid(key, format!("expected {want} comma-separated values, got {}", items.len())));
    }
    for z in &items {
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(invalid(key, "must be finite"));
        }
    }
    Ok(items)
}

/// One sparse monomial like `(2,0):0.5`.
fn parse_term(item: &str, dim: usize, line: usize) -> Result<(Vec<u32>, f64)> {
    let bad = || parse_err(line, format!("bad potential term '{item}', expected '(p,...):coeff'"));
    let inner = item.strip_prefix('(').ok_or_else(bad)?;
    let close = inner.find(')').ok_or_else(bad)?;
    let powers: Vec<u32> = inner[..close]
        .split(',')
        .map(|t| t.trim().parse().map_err(|_| bad()))
        .collect::<std::result::Result<_, _>>()?;
    let rest = inner[close + 1..].strip_prefix(':').ok_or_else(bad)?;
    let coeff = parse_f64("potential.terms", rest.trim(), line)?;
    if powers.len() != dim {
        return Err(invalid("potential.terms", format!("term '{item}' has {} powers, dim is {dim}", powers.len())));
    }
    Ok((powers, coeff))
}

pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let mut raw = RawKeys::scan(text)?;

    let (dim_v, dim_line) = raw.take("dim").ok_or_else(|| invalid("dim", "missing required key"))?;
    let dim = parse_usize("dim", &dim_v, dim_line)?;
    if dim == 0 {
        return Err(invalid("dim", "must be at least 1"));
    }

    let hbar = match raw.take("hbar") {
        Some((v, line)) => parse_f64("hbar", &v, line)?,
        None => 1.0,
    };
    if hbar <= 0.0 {
        return Err(invalid("hbar", "must be positive"));
    }

    let (mass_v, mass_line) = raw.take("mass").ok_or_else(|| invalid("mass", "missing required key"))?;
    let masses = parse_f64_list("mass", &mass_v, mass_line, dim)?;
    if masses.iter().any(|&m| m <= 0.0) {
        return Err(invalid("mass", "masses must be positive"));
    }

    let q0 = match raw.take("q0") {
        Some((v, line)) => parse_f64_list("q0", &v, line, dim)?,
        None => vec![0.0; dim],
    };
    let p0 = match raw.take("p0") {
        Some((v, line)) => parse_f64_list("p0", &v, line, dim)?,
        None => vec![0.0; dim],
    };

    let (alpha_v, alpha_line) =
        raw.take("alpha0").ok_or_else(|| invalid("alpha0", "missing required key"))?;
    let alpha0 = parse_complex_list("alpha0", &alpha_v, alpha_line, dim * dim)?;
    for j in 0..dim {
        for l in 0..j {
            if alpha0[j * dim + l] != alpha0[l * dim + j] {
                return Err(invalid("alpha0", "matrix must be symmetric"));
            }
        }
    }

    let gamma0 = match raw.take("gamma0") {
        Some((v, line)) => match v.as_str() {
            "unit-norm" => Gamma0::UnitNorm,
            "zero" => Gamma0::Zero,
            _ => {
                let z = parse_complex(&v).map_err(|m| parse_err(line, format!("gamma0: {m}")))?;
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(invalid("gamma0", "must be finite"));
                }
                Gamma0::Explicit(z)
            }
        },
        None => Gamma0::UnitNorm,
    };

    let coeffs = raw.take("potential.coeffs");
    let terms = raw.take("potential.terms");
    let potential = match (coeffs, terms) {
        (Some(_), Some(_)) => {
            return Err(invalid("potential.terms", "give either potential.coeffs or potential.terms, not both"));
        }
        (Some((v, line)), None) => {
            if dim != 1 {
                return Err(invalid("potential.coeffs", "dense coefficient lists are 1D; use potential.terms"));
            }
            let n = v.split(',').count();
            PotentialSpec::Coeffs(parse_f64_list("potential.coeffs", &v, line, n)?)
        }
        (None, Some((v, line))) => {
            let items: Vec<(Vec<u32>, f64)> = v
                .split_whitespace()
                .map(|item| parse_term(item, dim, line))
                .collect::<Result<_>>()?;
            if items.is_empty() {
                return Err(invalid("potential.terms", "no terms given"));
            }
            PotentialSpec::Terms(items)
        }
        (None, None) => PotentialSpec::None,
    };

    let b_slope = match raw.take("b.slope") {
        Some((v, line)) => parse_f64_list("b.slope", &v, line, dim)?,
        None => vec![0.0; dim],
    };
    let b_offset = match raw.take("b.offset") {
        Some((v, line)) => parse_f64_list("b.offset", &v, line, dim)?,
        None => vec![0.0; dim],
    };

    let (dt_v, dt_line) = raw.take("dt").ok_or_else(|| invalid("dt", "missing required key"))?;
    let dt = parse_f64("dt", &dt_v, dt_line)?;
    let (tf_v, tf_line) =
        raw.take("t_final").ok_or_else(|| invalid("t_final", "missing required key"))?;
    let t_final = parse_f64("t_final", &tf_v, tf_line)?;
    if dt <= 0.0 {
        return Err(invalid("dt", "must be positive"));
    }
    if !(dt < t_final) {
        return Err(invalid("dt", "must be smaller than t_final"));
    }

    let sample_stride = match raw.take("sample_stride") {
        Some((v, line)) => {
            let s = parse_usize("sample_stride", &v, line)?;
            if s == 0 {
                return Err(invalid("sample_stride", "must be at least 1"));
            }
            s
        }
        None => 10,
    };

    let mode = match raw.take("mode") {
        Some((v, _)) => Some(
            Mode::from_name(&v)
                .ok_or_else(|| invalid("mode", format!("'{v}' is not one of gwd, grid, compare, analytic")))?,
        ),
        None => None,
    };

    let grid = if raw.has_prefix("grid.") {
        let mut g = GridSpec::default();
        if let Some((v, line)) = raw.take("grid.n") {
            g.n = parse_usize("grid.n", &v, line)?;
            if g.n < 8 {
                return Err(invalid("grid.n", "need at least 8 points"));
            }
        }
        if let Some((v, line)) = raw.take("grid.length") {
            g.length = parse_f64("grid.length", &v, line)?;
            if g.length <= 0.0 {
                return Err(invalid("grid.length", "must be positive"));
            }
        }
        if let Some((v, line)) = raw.take("grid.center") {
            g.center = if v == "auto" { Center::Auto } else { Center::At(parse_f64("grid.center", &v, line)?) };
        }
        if let Some((v, _)) = raw.take("grid.scheme") {
            g.scheme = match v.as_str() {
                "auto" => Scheme::Auto,
                "spectral" => Scheme::Spectral,
                "cn" => Scheme::Cn,
                _ => return Err(invalid("grid.scheme", format!("'{v}' is not one of auto, spectral, cn"))),
            };
        }
        if let Some((v, line)) = raw.take("grid.mask") {
            g.mask = if v == "none" {
                None
            } else {
                let pair = parse_f64_list("grid.mask", &v, line, 2)?;
                if pair[0] <= 0.0 || pair[1] <= 0.0 {
                    return Err(invalid("grid.mask", "cutoff and width must be positive"));
                }
                Some((pair[0], pair[1]))
            };
        }
        if dim != 1 {
            return Err(invalid("grid.n", "grid propagation and densities are 1D only"));
        }
        Some(g)
    } else {
        None
    };

    let outputs = match raw.take("outputs") {
        Some((v, _)) => {
            let list: Vec<Artifact> = v
                .split(',')
                .map(|t| {
                    let t = t.trim();
                    Artifact::from_name(t)
                        .ok_or_else(|| invalid("outputs", format!("unknown artifact '{t}'")))
                })
                .collect::<Result<_>>()?;
            if list.is_empty() {
                return Err(invalid("outputs", "no artifacts listed"));
            }
            Some(list)
        }
        None => None,
    };

    raw.reject_leftovers()?;

    Ok(Scenario {
        dim,
        hbar,
        masses,
        q0,
        p0,
        alpha0,
        gamma0,
        potential,
        b_slope,
        b_offset,
        dt,
        t_final,
        sample_stride,
        mode,
        grid,
        outputs,
    })
}

fn join_f64(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

/// Canonical text form; `parse_scenario(print_scenario(s)) == s` exactly.
pub fn print_scenario(s: &Scenario) -> String {
    let mut out = String::new();
    let mut line = |text: String| {
        out.push_str(&text);
        out.push('\n');
    };
    line(format!("dim = {}", s.dim));
    line(format!("hbar = {}", s.hbar));
    line(format!("mass = {}", join_f64(&s.masses)));
    line(format!("q0 = {}", join_f64(&s.q0)));
    line(format!("p0 = {}", join_f64(&s.p0)));
    line(format!(
        "alpha0 = {}",
        s.alpha0.iter().map(|&z| format_complex(z)).collect::<Vec<_>>().join(",")
    ));
    line(format!(
        "gamma0 = {}",
        match s.gamma0 {
            Gamma0::UnitNorm => "unit-norm".to_string(),
            Gamma0::Zero => "zero".to_string(),
            Gamma0::Explicit(z) => format_complex(z),
        }
    ));
    match &s.potential {
        PotentialSpec::None => {}
        PotentialSpec::Coeffs(c) => line(format!("potential.coeffs = {}", join_f64(c))),
        PotentialSpec::Terms(terms) => {
            let items: Vec<String> = terms
                .iter()
                .map(|(powers, coeff)| {
                    let p = powers.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
                    format!("({p}):{coeff}")
                })
                .collect();
            line(format!("potential.terms = {}", items.join(" ")));
        }
    }
    line(format!("b.slope = {}", join_f64(&s.b_slope)));
    line(format!("b.offset = {}", join_f64(&s.b_offset)));
    line(format!("dt = {}", s.dt));
    line(format!("t_final = {}", s.t_final));
    line(format!("sample_stride = {}", s.sample_stride));
    if let Some(mode) = s.mode {
        line(format!("mode = {}", mode.name()));
    }
    if let Some(g) = &s.grid {
        line(format!("grid.n = {}", g.n));
        line(format!("grid.length = {}", g.length));
        line(format!(
            "grid.center = {}",
            match g.center {
                Center::Auto => "auto".to_string(),
                Center::At(x) => x.to_string(),
            }
        ));
        line(format!("grid.scheme = {}", g.scheme.name()));
        line(format!(
            "grid.mask = {}",
            match g.mask {
                None => "none".to_string(),
                Some((kc, w)) => format!("{kc},{w}"),
            }
        ));
    }
    if let Some(outputs) = &s.outputs {
        line(format!(
            "outputs = {}",
            outputs.iter().map(|a| a.name()).collect::<Vec<_>>().join(",")
        ));
    }
    out
}
