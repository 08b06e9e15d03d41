//! Config files, presets, and run outputs (time series, snapshots, manifest).

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diagnostics::DiagnosticsRecord;
use crate::dynamics::{run_simulation, Scheme, SimConfig, SimOutput, Termination};
use crate::error::{Error, Result};
use crate::geometry::{normalize_initial_data, CurveState};
use crate::spectral::Spectral;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const PRESETS: [&str; 5] = ["equilibrium", "theta-mode", "y-mode", "mixed", "random"];

pub const TIMESERIES_HEADER: &str = "t,E,D_rate,area,s,closure_defect,beta1,beta2,H1,H2,H2_5,h0,h1_5,a1,b1,a2,b2,fuglede,gage";

/// Highest Fourier mode used by the random preset.
const RANDOM_BAND: usize = 8;

pub fn parse_config(path: impl AsRef<Path>) -> Result<SimConfig> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config_str(&text)
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config_str(text: &str) -> Result<SimConfig> {
    let mut c = SimConfig::default();
    let mut seen: Vec<(String, usize)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let err = |msg: String| Error::Config { line, msg };
        let (key, value) = body.split_once('=').ok_or_else(|| err(format!("expected `key = value`, got `{body}`")))?;
        let key = key.trim();
        let value = value.trim();
        if seen.iter().any(|(k, _)| k == key) {
            return Err(err(format!("duplicate key `{key}`")));
        }
        let float = || value.parse::<f64>().map_err(|_| err(format!("`{key}` expects a number, got `{value}`")));
        let uint = || value.parse::<u64>().map_err(|_| err(format!("`{key}` expects a nonnegative integer, got `{value}`")));
        let nonneg = |v: f64| {
            if v >= 0.0 && v.is_finite() {
                Ok(v)
            } else {
                Err(err(format!("`{key}` must be a nonnegative number, got `{value}`")))
            }
        };
        match key {
            "n" => {
                let n = uint()? as usize;
                if n < 4 || n % 2 != 0 {
                    return Err(err(format!("n must be even and >= 4, got {n}")));
                }
                c.n = n;
            }
            "dt" => {
                let dt = float()?;
                if !(dt > 0.0 && dt.is_finite()) {
                    return Err(err(format!("dt must be positive, got `{value}`")));
                }
                c.dt = dt;
            }
            "t_final" => c.t_final = nonneg(float()?)?,
            "scheme" => c.scheme = Scheme::parse(value).ok_or_else(|| err(format!("unknown scheme `{value}`")))?,
            "dealias" => {
                c.dealias = value.parse().map_err(|_| err(format!("`dealias` expects true or false, got `{value}`")))?
            }
            "output_every" => {
                c.output_every = uint()? as usize;
                if c.output_every == 0 {
                    return Err(err("output_every must be positive".into()));
                }
            }
            "preset" => {
                if !PRESETS.contains(&value) {
                    return Err(err(format!("unknown preset `{value}`")));
                }
                c.preset = value.to_string();
            }
            "c1" => c.params.c1 = nonneg(float()?)?,
            "c3" => c.params.c3 = nonneg(float()?)?,
            "lambda" => c.params.lambda = nonneg(float()?)?,
            "B" => c.params.b = float()?,
            "s_op" => c.params.s_op = nonneg(float()?)?,
            "epsilon" => c.epsilon = nonneg(float()?)?,
            "mode_k" => c.mode_k = uint()? as usize,
            "seed" => c.seed = uint()?,
            "out_dir" => c.out_dir = value.to_string(),
            _ => return Err(err(format!("unknown key `{key}`"))),
        }
        seen.push((key.to_string(), line));
    }
    // Only the joint force-parameter condition can still fail; blame the
    // last line that touched one of those keys.
    if let Err(e) = c.validate() {
        let line = seen.iter().filter(|(k, _)| matches!(k.as_str(), "c1" | "c3" | "lambda" | "B" | "s_op")).map(|(_, l)| *l).max().unwrap_or(0);
        return Err(Error::Config { line, msg: e.to_string() });
    }
    Ok(c)
}

pub fn emit_config(c: &SimConfig) -> String {
    let mut s = String::new();
    let p = &c.params;
    let _ = writeln!(s, "n = {}", c.n);
    let _ = writeln!(s, "dt = {:e}", c.dt);
    let _ = writeln!(s, "t_final = {:e}", c.t_final);
    let _ = writeln!(s, "scheme = {}", c.scheme.name());
    let _ = writeln!(s, "dealias = {}", c.dealias);
    let _ = writeln!(s, "output_every = {}", c.output_every);
    let _ = writeln!(s, "preset = {}", c.preset);
    let _ = writeln!(s, "c1 = {:e}", p.c1);
    let _ = writeln!(s, "c3 = {:e}", p.c3);
    let _ = writeln!(s, "lambda = {:e}", p.lambda);
    let _ = writeln!(s, "B = {:e}", p.b);
    let _ = writeln!(s, "s_op = {:e}", p.s_op);
    let _ = writeln!(s, "epsilon = {:e}", c.epsilon);
    let _ = writeln!(s, "mode_k = {}", c.mode_k);
    let _ = writeln!(s, "seed = {}", c.seed);
    let _ = writeln!(s, "out_dir = {}", c.out_dir);
    s
}

fn band_limited(rng: &mut ChaCha8Rng, sp: &Spectral, amplitude: f64) -> Vec<f64> {
    let coef: Vec<(f64, f64)> = (1..=RANDOM_BAND)
        .map(|k| {
            let w = 1.0 / (k * k) as f64;
            (w * rng.gen_range(-1.0..1.0), w * rng.gen_range(-1.0..1.0))
        })
        .collect();
    let f: Vec<f64> = sp
        .points()
        .iter()
        .map(|&a| coef.iter().enumerate().map(|(i, (c, s))| {
            let k = (i + 1) as f64;
            c * (k * a).cos() + s * (k * a).sin()
        }).sum())
        .collect();
    let m = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if m == 0.0 {
        return f;
    }
    f.iter().map(|v| v * amplitude / m).collect()
}

/// Initial state for a named preset, normalized to a closed curve of area π.
pub fn preset_state(name: &str, config: &SimConfig) -> Result<CurveState> {
    let sp = Spectral::new(config.n)?;
    let eps = config.epsilon;
    let k = config.mode_k as f64;
    let wave = |amp: f64| -> Vec<f64> { sp.points().iter().map(|a| amp * (k * a).sin()).collect() };
    let zero = vec![0.0; config.n];
    let (d, y) = match name {
        "equilibrium" => return Ok(CurveState::equilibrium(config.n)),
        "theta-mode" => (wave(eps), zero),
        "y-mode" => (zero, wave(eps)),
        "mixed" => (wave(eps), wave(eps)),
        "random" => {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            let d = band_limited(&mut rng, &sp, eps);
            let y = band_limited(&mut rng, &sp, eps);
            (d, y)
        }
        _ => return Err(Error::InvalidArgument(format!("unknown preset `{name}`"))),
    };
    if config.mode_k == 0 && matches!(name, "theta-mode" | "y-mode" | "mixed") {
        return Err(Error::InvalidArgument("mode_k must be positive".into()));
    }
    normalize_initial_data(&sp, &d, &y, std::f64::consts::PI)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunManifest {
    pub config: SimConfig,
    pub version: String,
    /// Seconds since the Unix epoch.
    pub start: f64,
    pub end: f64,
    pub termination: Termination,
    pub abort: Option<String>,
}

impl RunManifest {
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "version = {}", self.version);
        let _ = writeln!(s, "start_unix = {:.3}", self.start);
        let _ = writeln!(s, "end_unix = {:.3}", self.end);
        let _ = writeln!(s, "termination = {}", self.termination.name());
        if let Some(a) = &self.abort {
            let _ = writeln!(s, "abort_reason = {a}");
        }
        let _ = writeln!(s, "# config");
        s.push_str(&emit_config(&self.config));
        s
    }
}

pub fn unix_now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

pub fn format_record(r: &DiagnosticsRecord) -> String {
    let s = &r.sobolev;
    let vals = [
        r.t,
        r.energy,
        r.dissipation,
        r.area,
        r.s,
        r.closure_defect,
        r.beta1,
        r.beta2,
        s.h1,
        s.h2,
        s.h2_5,
        s.h0,
        s.h1_5,
        r.modes[0].0,
        r.modes[0].1,
        r.modes[1].0,
        r.modes[1].1,
        r.fuglede_ratio,
        r.gage_value,
    ];
    vals.iter().map(|v| format!("{v:.16e}")).collect::<Vec<_>>().join(",")
}

pub fn format_snapshot(state: &CurveState) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# t = {:.16e}", state.t);
    let _ = writeln!(s, "# s = {:.16e}", state.s);
    let _ = writeln!(s, "# theta_bar = {:.16e}", state.theta_bar);
    let _ = writeln!(s, "# base = {:.16e},{:.16e}", state.base[0], state.base[1]);
    let _ = writeln!(s, "alpha,D,y_s");
    let h = 2.0 * std::f64::consts::PI / state.n() as f64;
    for j in 0..state.n() {
        let a = -std::f64::consts::PI + j as f64 * h;
        let _ = writeln!(s, "{:.16e},{:.16e},{:.16e}", a, state.d[j], state.y_s[j]);
    }
    s
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes timeseries.csv, snapshot_<step>.csv and manifest.txt; returns the paths.
pub fn emit_outputs(out: &SimOutput, manifest: &RunManifest, out_dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = out_dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut paths = Vec::new();
    let mut ts = String::from(TIMESERIES_HEADER);
    ts.push('\n');
    for r in &out.records {
        ts.push_str(&format_record(r));
        ts.push('\n');
    }
    let p = dir.join("timeseries.csv");
    write(&p, &ts)?;
    paths.push(p);
    for (step, st) in &out.snapshots {
        let p = dir.join(format!("snapshot_{step}.csv"));
        write(&p, &format_snapshot(st))?;
        paths.push(p);
    }
    let p = dir.join("manifest.txt");
    write(&p, &manifest.render())?;
    paths.push(p);
    Ok(paths)
}

pub fn load_snapshot(path: impl AsRef<Path>) -> Result<CurveState> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_snapshot(&text).map_err(|msg| Error::Snapshot { path: path.to_path_buf(), msg })
}

pub fn parse_snapshot(text: &str) -> std::result::Result<CurveState, String> {
    let num = |v: &str| v.trim().parse::<f64>().map_err(|_| format!("bad number `{}`", v.trim()));
    let (mut t, mut s, mut tb, mut base) = (None, None, None, None);
    let mut d = Vec::new();
    let mut y = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let (k, v) = rest.split_once('=').ok_or_else(|| format!("line {}: malformed header", i + 1))?;
            match k.trim() {
                "t" => t = Some(num(v)?),
                "s" => s = Some(num(v)?),
                "theta_bar" => tb = Some(num(v)?),
                "base" => {
                    let (a, b) = v.split_once(',').ok_or("base needs two components")?;
                    base = Some([num(a)?, num(b)?]);
                }
                other => return Err(format!("line {}: unknown header `{other}`", i + 1)),
            }
            continue;
        }
        if line == "alpha,D,y_s" {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 3 {
            return Err(format!("line {}: expected 3 columns", i + 1));
        }
        d.push(num(cols[1])?);
        y.push(num(cols[2])?);
    }
    let n = d.len();
    if n < 4 || n % 2 != 0 {
        return Err(format!("sample count {n} is not even and >= 4"));
    }
    Ok(CurveState {
        d,
        theta_bar: tb.ok_or("missing theta_bar")?,
        y_s: y,
        s: s.ok_or("missing s")?,
        base: base.ok_or("missing base")?,
        t: t.ok_or("missing t")?,
    })
}

/// Builds the preset, runs it, and writes every output file into `out_dir`.
pub fn run_and_emit(config: &SimConfig, out_dir: impl AsRef<Path>) -> Result<(SimOutput, RunManifest)> {
    let start = unix_now();
    let initial = preset_state(&config.preset, config)?;
    let out = run_simulation(&initial, config)?;
    let manifest = RunManifest {
        config: config.clone(),
        version: VERSION.to_string(),
        start,
        end: unix_now(),
        termination: out.termination,
        abort: out.abort.clone(),
    };
    emit_outputs(&out, &manifest, out_dir)?;
    Ok((out, manifest))
}
