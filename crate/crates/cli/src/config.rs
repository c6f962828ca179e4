//! Run configuration: a strict, versioned key-value grammar with nested
//! brace blocks. Unknown keys are fatal and every violation is collected,
//! not just the first; a silent typo in a tolerance name must never slip
//! into an acceptance run.
//!
//! ```text
//! version 1
//! command green
//! seed 42
//! domain { kind disk radius 1.0 resolution 256 }
//! background { base zero augmentation auto }
//! boundary { value 0.0 }
//! solver { backend envelope }
//! pole { position 0.3 0.0 epsilon 0.5 f "z" r_in 0.15 r_out 0.45 }
//! ```

use std::fmt::Write as _;

use plurigreen_core::poly::Poly;
use plurigreen_core::C64;

#[derive(Clone, Debug, PartialEq)]
pub enum ConfigError {
    /// Lexical or structural failure: byte position and what was expected.
    Parse { position: usize, expected: String, found: String },
    /// Semantic violations, all of them.
    Validation(Vec<ValidationIssue>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidationIssue {
    pub field: String,
    pub constraint: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConfigError::Parse { position, expected, found } => {
                write!(f, "parse error at byte {position}: expected {expected}, found {found}")
            }
            ConfigError::Validation(issues) => {
                writeln!(f, "{} validation error(s):", issues.len())?;
                for i in issues {
                    writeln!(f, "  {}: {}", i.field, i.constraint)?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Green,
    Torus,
    Ray,
    Blowup,
    Verify,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Green => "green",
            Command::Torus => "torus",
            Command::Ray => "ray",
            Command::Blowup => "blowup",
            Command::Verify => "verify",
        }
    }

    pub fn parse(s: &str) -> Option<Command> {
        Some(match s {
            "green" => Command::Green,
            "torus" => Command::Torus,
            "ray" => Command::Ray,
            "blowup" => Command::Blowup,
            "verify" => Command::Verify,
            _ => return None,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DomainKindCfg {
    Disk,
    Annulus,
    Ball,
    Polydisk,
    Torus1,
    Torus2,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DomainCfg {
    pub kind: DomainKindCfg,
    /// Outer radius for disk/annulus/ball/polydisk.
    pub radius: f64,
    /// Inner radius, annulus only.
    pub inner: f64,
    pub resolution: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Augmentation {
    Auto,
    Fixed(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BackgroundBaseCfg {
    Flat,
    Zero,
    FubiniStudy,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BackgroundCfg {
    pub base: BackgroundBaseCfg,
    pub augmentation: Augmentation,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PoleCfg {
    /// 2 (one complex variable) or 4 (two) coordinates.
    pub position: Vec<f64>,
    pub epsilon: f64,
    /// Component polynomials in pole-centered coordinates, source form.
    pub f: Vec<String>,
    pub r_in: f64,
    pub r_out: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BackendCfg {
    Envelope,
    Regularized,
    Both,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverCfg {
    pub backend: BackendCfg,
    pub tol_fix: f64,
    pub max_sweeps: usize,
    /// Excision radius in grid cells.
    pub excision_cells: f64,
    pub t0: f64,
    pub t_ratio: f64,
    pub t_min: f64,
}

impl Default for SolverCfg {
    fn default() -> Self {
        SolverCfg {
            backend: BackendCfg::Envelope,
            tol_fix: 1e-8,
            max_sweeps: 100_000,
            excision_cells: 4.0,
            t0: 1.0,
            t_ratio: 0.5,
            t_min: 1e-3,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GreenCfg {
    pub domain: DomainCfg,
    pub background: BackgroundCfg,
    pub boundary_value: f64,
    pub solver: SolverCfg,
    pub poles: Vec<PoleCfg>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TorusCfg {
    pub n: usize,
    pub resolution: usize,
    pub epsilon: f64,
    /// Mollification radius in grid cells.
    pub sigma_cells: f64,
    /// Pole position in period fractions.
    pub pole: Vec<f64>,
    /// uniform | cosine amp kx ky
    pub density: DensityCfg,
}

#[derive(Clone, Debug, PartialEq)]
pub enum DensityCfg {
    Uniform,
    Cosine { amp: f64, kx: i32, ky: i32 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct RayCfg {
    pub depth: f64,
    pub s_half: f64,
    pub resolution: usize,
    pub epsilon: f64,
    pub slices: usize,
    pub r_in: f64,
    pub r_out: f64,
    /// Monomial strings in z and w.
    pub f: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlowupCfg {
    pub samples: usize,
    pub zeta_max: f64,
    pub theta_max: f64,
    pub r_in: f64,
    pub r_out: f64,
    pub lambda_instances: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub version: u32,
    pub command: Command,
    pub seed: u64,
    pub out_dir: Option<String>,
    pub green: Option<GreenCfg>,
    pub torus: Option<TorusCfg>,
    pub ray: Option<RayCfg>,
    pub blowup: Option<BlowupCfg>,
    pub suite: Option<String>,
}

// ---------------------------------------------------------------------
// lexer

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Ident(String),
    Number(f64),
    Str(String),
    Open,
    Close,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src: src.as_bytes(), pos: 0 }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() {
            let c = self.src[self.pos];
            if c == b'#' {
                while self.pos < self.src.len() && self.src[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else if c.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn next(&mut self) -> Result<Option<(usize, Token)>, ConfigError> {
        self.skip_ws();
        if self.pos >= self.src.len() {
            return Ok(None);
        }
        let start = self.pos;
        let c = self.src[self.pos];
        match c {
            b'{' => {
                self.pos += 1;
                Ok(Some((start, Token::Open)))
            }
            b'}' => {
                self.pos += 1;
                Ok(Some((start, Token::Close)))
            }
            b'"' => {
                self.pos += 1;
                let mut out = String::new();
                while self.pos < self.src.len() && self.src[self.pos] != b'"' {
                    out.push(self.src[self.pos] as char);
                    self.pos += 1;
                }
                if self.pos >= self.src.len() {
                    return Err(ConfigError::Parse {
                        position: start,
                        expected: "closing quote".into(),
                        found: "end of input".into(),
                    });
                }
                self.pos += 1;
                Ok(Some((start, Token::Str(out))))
            }
            c if c.is_ascii_digit() || c == b'-' || c == b'+' || c == b'.' => {
                let mut end = self.pos + 1;
                while end < self.src.len() {
                    let d = self.src[end];
                    if d.is_ascii_alphanumeric() || d == b'.' || d == b'+' || d == b'-' {
                        // allow exponent forms like 1e-3
                        end += 1;
                    } else {
                        break;
                    }
                }
                let text = std::str::from_utf8(&self.src[self.pos..end]).unwrap();
                match text.parse::<f64>() {
                    Ok(v) => {
                        self.pos = end;
                        Ok(Some((start, Token::Number(v))))
                    }
                    Err(_) => Err(ConfigError::Parse {
                        position: start,
                        expected: "number".into(),
                        found: text.into(),
                    }),
                }
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let mut end = self.pos + 1;
                while end < self.src.len() {
                    let d = self.src[end];
                    if d.is_ascii_alphanumeric() || d == b'_' || d == b'-' {
                        end += 1;
                    } else {
                        break;
                    }
                }
                let text = std::str::from_utf8(&self.src[self.pos..end]).unwrap().to_string();
                self.pos = end;
                Ok(Some((start, Token::Ident(text))))
            }
            other => Err(ConfigError::Parse {
                position: start,
                expected: "identifier, number, string or brace".into(),
                found: format!("{:?}", other as char),
            }),
        }
    }
}

// generic tree the validator walks
#[derive(Clone, Debug)]
enum Value {
    Number(f64),
    Word(String),
    Text(String),
    Block(Vec<(usize, String, Vec<Value>)>),
}

/// Parses the token stream into entries key -> values (several scalars or
/// one block each). Repeated keys are kept in order.
fn parse_entries(lx: &mut Lexer, depth: usize) -> Result<Vec<(usize, String, Vec<Value>)>, ConfigError> {
    let mut out = Vec::new();
    loop {
        let save = lx.pos;
        let Some((pos, tok)) = lx.next()? else {
            if depth > 0 {
                return Err(ConfigError::Parse {
                    position: save,
                    expected: "closing brace".into(),
                    found: "end of input".into(),
                });
            }
            return Ok(out);
        };
        match tok {
            Token::Close if depth > 0 => return Ok(out),
            Token::Ident(key) => {
                let mut vals = Vec::new();
                loop {
                    let save_inner = lx.pos;
                    match lx.next()? {
                        Some((_, Token::Number(v))) => vals.push(Value::Number(v)),
                        Some((_, Token::Str(s))) => vals.push(Value::Text(s)),
                        Some((_, Token::Ident(w))) => {
                            // a bare word value, unless it starts the next
                            // entry: words are values only right after the
                            // key or another word/number
                            if vals.is_empty() {
                                vals.push(Value::Word(w));
                            } else {
                                lx.pos = save_inner;
                                break;
                            }
                        }
                        Some((_, Token::Open)) => {
                            let inner = parse_entries(lx, depth + 1)?;
                            vals.push(Value::Block(inner));
                            break;
                        }
                        Some((_, Token::Close)) => {
                            lx.pos = save_inner;
                            break;
                        }
                        None => break,
                    }
                }
                out.push((pos, key, vals));
            }
            other => {
                return Err(ConfigError::Parse {
                    position: pos,
                    expected: "key identifier".into(),
                    found: format!("{other:?}"),
                });
            }
        }
    }
}

// ---------------------------------------------------------------------
// validation helpers

struct Check {
    issues: Vec<ValidationIssue>,
}

impl Check {
    fn new() -> Self {
        Check { issues: Vec::new() }
    }

    fn push(&mut self, field: &str, constraint: impl Into<String>) {
        self.issues.push(ValidationIssue { field: field.into(), constraint: constraint.into() });
    }

    fn number(&mut self, field: &str, vals: &[Value]) -> Option<f64> {
        match vals {
            [Value::Number(v)] => Some(*v),
            _ => {
                self.push(field, "expected one number");
                None
            }
        }
    }

    fn word(&mut self, field: &str, vals: &[Value]) -> Option<String> {
        match vals {
            [Value::Word(w)] => Some(w.clone()),
            _ => {
                self.push(field, "expected one identifier");
                None
            }
        }
    }
}

fn expect_numbers(check: &mut Check, field: &str, vals: &[Value], counts: &[usize]) -> Option<Vec<f64>> {
    let nums: Option<Vec<f64>> = vals
        .iter()
        .map(|v| if let Value::Number(x) = v { Some(*x) } else { None })
        .collect();
    match nums {
        Some(ns) if counts.contains(&ns.len()) => Some(ns),
        _ => {
            check.push(field, format!("expected {counts:?} numbers"));
            None
        }
    }
}

// ---------------------------------------------------------------------
// public API

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut lx = Lexer::new(text);
    let entries = parse_entries(&mut lx, 0)?;
    let mut check = Check::new();

    let mut version = None;
    let mut command = None;
    let mut seed = 0u64;
    let mut out_dir = None;
    let mut suite = None;
    let mut green_parts: GreenParts = GreenParts::default();
    let mut torus = None;
    let mut ray = None;
    let mut blowup = None;

    for (_, key, vals) in &entries {
        match key.as_str() {
            "version" => {
                if let Some(v) = check.number("version", vals) {
                    if v == 1.0 {
                        version = Some(1u32);
                    } else {
                        check.push("version", "only grammar version 1 is defined");
                    }
                }
            }
            "command" => {
                if let Some(w) = check.word("command", vals) {
                    match Command::parse(&w) {
                        Some(c) => command = Some(c),
                        None => check.push("command", "one of green|torus|ray|blowup|verify"),
                    }
                }
            }
            "seed" => {
                if let Some(v) = check.number("seed", vals) {
                    if v >= 0.0 && v.fract() == 0.0 {
                        seed = v as u64;
                    } else {
                        check.push("seed", "must be a nonnegative integer");
                    }
                }
            }
            "out" => match vals.as_slice() {
                [Value::Text(s)] => out_dir = Some(s.clone()),
                _ => check.push("out", "expected one quoted path"),
            },
            "suite" => {
                if let Some(w) = check.word("suite", vals) {
                    suite = Some(w);
                }
            }
            "domain" => green_parts.domain = parse_domain(&mut check, vals),
            "background" => green_parts.background = parse_background(&mut check, vals),
            "boundary" => green_parts.boundary = parse_boundary(&mut check, vals),
            "solver" => green_parts.solver = parse_solver(&mut check, vals),
            "pole" => {
                if let Some(p) = parse_pole(&mut check, vals) {
                    green_parts.poles.push(p);
                }
            }
            "torus" => torus = parse_torus(&mut check, vals),
            "ray" => ray = parse_ray(&mut check, vals),
            "blowup" => blowup = parse_blowup(&mut check, vals),
            other => check.push(other, "unknown key"),
        }
    }

    let version = version.unwrap_or_else(|| {
        check.push("version", "missing (version 1 required)");
        1
    });
    let command = command.unwrap_or_else(|| {
        check.push("command", "missing");
        Command::Verify
    });

    let green = green_parts.assemble(&mut check, command);
    validate_cross(&mut check, command, &green, &torus, &ray, &blowup, &suite);

    if check.issues.is_empty() {
        Ok(RunConfig { version, command, seed, out_dir, green, torus, ray, blowup, suite })
    } else {
        Err(ConfigError::Validation(check.issues))
    }
}

#[derive(Default)]
struct GreenParts {
    domain: Option<DomainCfg>,
    background: Option<BackgroundCfg>,
    boundary: Option<f64>,
    solver: Option<SolverCfg>,
    poles: Vec<PoleCfg>,
}

impl GreenParts {
    fn assemble(self, check: &mut Check, command: Command) -> Option<GreenCfg> {
        if command != Command::Green {
            if self.domain.is_some() || !self.poles.is_empty() {
                check.push("domain", "green blocks are only valid for the green command");
            }
            return None;
        }
        let Some(domain) = self.domain else {
            check.push("domain", "missing for the green command");
            return None;
        };
        let background = self.background.unwrap_or(BackgroundCfg {
            base: BackgroundBaseCfg::Zero,
            augmentation: Augmentation::Auto,
        });
        Some(GreenCfg {
            domain,
            background,
            boundary_value: self.boundary.unwrap_or(0.0),
            solver: self.solver.unwrap_or_default(),
            poles: self.poles,
        })
    }
}

fn block<'v>(check: &mut Check, field: &str, vals: &'v [Value]) -> Option<&'v [(usize, String, Vec<Value>)]> {
    match vals {
        [Value::Block(entries)] => Some(entries),
        _ => {
            check.push(field, "expected a { ... } block");
            None
        }
    }
}

fn parse_domain(check: &mut Check, vals: &[Value]) -> Option<DomainCfg> {
    let entries = block(check, "domain", vals)?;
    let mut kind = None;
    let mut radius = 1.0;
    let mut inner = 0.5;
    let mut resolution = None;
    for (_, key, vals) in entries {
        match key.as_str() {
            "kind" => {
                if let Some(w) = check.word("domain.kind", vals) {
                    kind = match w.as_str() {
                        "disk" => Some(DomainKindCfg::Disk),
                        "annulus" => Some(DomainKindCfg::Annulus),
                        "ball" => Some(DomainKindCfg::Ball),
                        "polydisk" => Some(DomainKindCfg::Polydisk),
                        "torus1" => Some(DomainKindCfg::Torus1),
                        "torus2" => Some(DomainKindCfg::Torus2),
                        _ => {
                            check.push("domain.kind", "one of disk|annulus|ball|polydisk|torus1|torus2");
                            None
                        }
                    };
                }
            }
            "radius" => {
                if let Some(v) = check.number("domain.radius", vals) {
                    radius = v;
                }
            }
            "inner" => {
                if let Some(v) = check.number("domain.inner", vals) {
                    inner = v;
                }
            }
            "resolution" => {
                if let Some(v) = check.number("domain.resolution", vals) {
                    if v >= 16.0 && v.fract() == 0.0 {
                        resolution = Some(v as usize);
                    } else {
                        check.push("domain.resolution", "integer >= 16");
                    }
                }
            }
            other => check.push(&format!("domain.{other}"), "unknown key"),
        }
    }
    if kind.is_none() {
        check.push("domain.kind", "missing");
    }
    if resolution.is_none() {
        check.push("domain.resolution", "missing");
    }
    if radius <= 0.0 {
        check.push("domain.radius", "must be > 0");
    }
    Some(DomainCfg { kind: kind?, radius, inner, resolution: resolution? })
}

fn parse_background(check: &mut Check, vals: &[Value]) -> Option<BackgroundCfg> {
    let entries = block(check, "background", vals)?;
    let mut base = BackgroundBaseCfg::Zero;
    let mut augmentation = Augmentation::Auto;
    for (_, key, vals) in entries {
        match key.as_str() {
            "base" => {
                if let Some(w) = check.word("background.base", vals) {
                    base = match w.as_str() {
                        "flat" => BackgroundBaseCfg::Flat,
                        "zero" => BackgroundBaseCfg::Zero,
                        "fubini-study" => BackgroundBaseCfg::FubiniStudy,
                        _ => {
                            check.push("background.base", "one of flat|zero|fubini-study");
                            continue;
                        }
                    };
                }
            }
            "augmentation" => match vals.as_slice() {
                [Value::Word(w)] if w == "auto" => augmentation = Augmentation::Auto,
                [Value::Number(v)] if *v >= 0.0 => augmentation = Augmentation::Fixed(*v),
                _ => check.push("background.augmentation", "auto or a number >= 0"),
            },
            other => check.push(&format!("background.{other}"), "unknown key"),
        }
    }
    Some(BackgroundCfg { base, augmentation })
}

fn parse_boundary(check: &mut Check, vals: &[Value]) -> Option<f64> {
    let entries = block(check, "boundary", vals)?;
    let mut value = 0.0;
    for (_, key, vals) in entries {
        match key.as_str() {
            "value" => {
                if let Some(v) = check.number("boundary.value", vals) {
                    if v.is_finite() {
                        value = v;
                    } else {
                        check.push("boundary.value", "must be finite");
                    }
                }
            }
            other => check.push(&format!("boundary.{other}"), "unknown key"),
        }
    }
    Some(value)
}

fn parse_solver(check: &mut Check, vals: &[Value]) -> Option<SolverCfg> {
    let entries = block(check, "solver", vals)?;
    let mut cfg = SolverCfg::default();
    for (_, key, vals) in entries {
        match key.as_str() {
            "backend" => {
                if let Some(w) = check.word("solver.backend", vals) {
                    cfg.backend = match w.as_str() {
                        "envelope" => BackendCfg::Envelope,
                        "regularized" => BackendCfg::Regularized,
                        "both" => BackendCfg::Both,
                        _ => {
                            check.push("solver.backend", "one of envelope|regularized|both");
                            continue;
                        }
                    };
                }
            }
            "tol_fix" => {
                if let Some(v) = check.number("solver.tol_fix", vals) {
                    if v > 0.0 && v <= 1e-2 {
                        cfg.tol_fix = v;
                    } else {
                        check.push("solver.tol_fix", "in (0, 1e-2]");
                    }
                }
            }
            "max_sweeps" => {
                if let Some(v) = check.number("solver.max_sweeps", vals) {
                    if v >= 1.0 && v.fract() == 0.0 {
                        cfg.max_sweeps = v as usize;
                    } else {
                        check.push("solver.max_sweeps", "positive integer");
                    }
                }
            }
            "excision_cells" => {
                if let Some(v) = check.number("solver.excision_cells", vals) {
                    if v >= 1.0 {
                        cfg.excision_cells = v;
                    } else {
                        check.push("solver.excision_cells", "at least 1 grid cell");
                    }
                }
            }
            "t0" => {
                if let Some(v) = check.number("solver.t0", vals) {
                    if v > 0.0 && v <= 1.0 {
                        cfg.t0 = v;
                    } else {
                        check.push("solver.t0", "in (0, 1]");
                    }
                }
            }
            "t_ratio" => {
                if let Some(v) = check.number("solver.t_ratio", vals) {
                    if v > 0.0 && v < 1.0 {
                        cfg.t_ratio = v;
                    } else {
                        check.push("solver.t_ratio", "in (0, 1)");
                    }
                }
            }
            "t_min" => {
                if let Some(v) = check.number("solver.t_min", vals) {
                    if v >= 1e-4 && v <= 1.0 {
                        cfg.t_min = v;
                    } else {
                        check.push("solver.t_min", "in [1e-4, 1]");
                    }
                }
            }
            other => check.push(&format!("solver.{other}"), "unknown key"),
        }
    }
    Some(cfg)
}

fn parse_pole(check: &mut Check, vals: &[Value]) -> Option<PoleCfg> {
    let entries = block(check, "pole", vals)?;
    let mut position = None;
    let mut epsilon = None;
    let mut f = Vec::new();
    let mut r_in = 0.1;
    let mut r_out = 0.2;
    for (_, key, vals) in entries {
        match key.as_str() {
            "position" => position = expect_numbers(check, "pole.position", vals, &[2, 4]),
            "epsilon" => {
                if let Some(v) = check.number("pole.epsilon", vals) {
                    if v > 0.0 {
                        epsilon = Some(v);
                    } else {
                        check.push("pole.epsilon", "must be > 0");
                    }
                }
            }
            "f" => match vals.as_slice() {
                [Value::Text(s)] => f.push(s.clone()),
                _ => check.push("pole.f", "expected a quoted polynomial"),
            },
            "r_in" => {
                if let Some(v) = check.number("pole.r_in", vals) {
                    r_in = v;
                }
            }
            "r_out" => {
                if let Some(v) = check.number("pole.r_out", vals) {
                    r_out = v;
                }
            }
            other => check.push(&format!("pole.{other}"), "unknown key"),
        }
    }
    if position.is_none() {
        check.push("pole.position", "missing");
    }
    if epsilon.is_none() {
        check.push("pole.epsilon", "missing");
    }
    if f.is_empty() {
        check.push("pole.f", "at least one component required");
    }
    if !(r_in > 0.0 && r_out > r_in) {
        check.push("pole.r_in", "need 0 < r_in < r_out");
    }
    Some(PoleCfg { position: position?, epsilon: epsilon?, f, r_in, r_out })
}

fn parse_torus(check: &mut Check, vals: &[Value]) -> Option<TorusCfg> {
    let entries = block(check, "torus", vals)?;
    let mut n = 1usize;
    let mut resolution = None;
    let mut epsilon = None;
    let mut sigma_cells = 8.0;
    let mut pole = vec![0.5, 0.5];
    let mut density = DensityCfg::Uniform;
    for (_, key, vals) in entries {
        match key.as_str() {
            "n" => {
                if let Some(v) = check.number("torus.n", vals) {
                    if v == 1.0 || v == 2.0 {
                        n = v as usize;
                    } else {
                        check.push("torus.n", "1 or 2");
                    }
                }
            }
            "resolution" => {
                if let Some(v) = check.number("torus.resolution", vals) {
                    if v >= 16.0 && v.fract() == 0.0 {
                        resolution = Some(v as usize);
                    } else {
                        check.push("torus.resolution", "integer >= 16");
                    }
                }
            }
            "epsilon" => {
                if let Some(v) = check.number("torus.epsilon", vals) {
                    if v > 0.0 && v < 1.0 {
                        epsilon = Some(v);
                    } else {
                        check.push("torus.epsilon", "in (0, 1)");
                    }
                }
            }
            "sigma_cells" => {
                if let Some(v) = check.number("torus.sigma_cells", vals) {
                    if v >= 1.0 {
                        sigma_cells = v;
                    } else {
                        check.push("torus.sigma_cells", "at least 1 cell");
                    }
                }
            }
            "pole" => {
                if let Some(p) = expect_numbers(check, "torus.pole", vals, &[2, 4]) {
                    if p.iter().all(|x| (0.0..1.0).contains(x)) {
                        pole = p;
                    } else {
                        check.push("torus.pole", "fractions of the period in [0, 1)");
                    }
                }
            }
            "density" => match vals.as_slice() {
                [Value::Word(w)] if w == "uniform" => density = DensityCfg::Uniform,
                [Value::Word(w), Value::Number(a), Value::Number(kx), Value::Number(ky)]
                    if w == "cosine" =>
                {
                    if a.abs() < 1.0 && kx.fract() == 0.0 && ky.fract() == 0.0 {
                        density =
                            DensityCfg::Cosine { amp: *a, kx: *kx as i32, ky: *ky as i32 };
                    } else {
                        check.push("torus.density", "cosine needs |amp| < 1 and integer modes");
                    }
                }
                _ => check.push("torus.density", "uniform or: cosine amp kx ky"),
            },
            other => check.push(&format!("torus.{other}"), "unknown key"),
        }
    }
    if resolution.is_none() {
        check.push("torus.resolution", "missing");
    }
    if epsilon.is_none() {
        check.push("torus.epsilon", "missing");
    }
    Some(TorusCfg { n, resolution: resolution?, epsilon: epsilon?, sigma_cells, pole, density })
}

fn parse_ray(check: &mut Check, vals: &[Value]) -> Option<RayCfg> {
    let entries = block(check, "ray", vals)?;
    let mut cfg = RayCfg {
        depth: 4.0,
        s_half: 4.0,
        resolution: 128,
        epsilon: 0.2,
        slices: 9,
        r_in: 0.15,
        r_out: 0.45,
        f: Vec::new(),
    };
    for (_, key, vals) in entries {
        match key.as_str() {
            "depth" => {
                if let Some(v) = check.number("ray.depth", vals) {
                    cfg.depth = v;
                }
            }
            "s_half" => {
                if let Some(v) = check.number("ray.s_half", vals) {
                    cfg.s_half = v;
                }
            }
            "resolution" => {
                if let Some(v) = check.number("ray.resolution", vals) {
                    if v >= 16.0 && v.fract() == 0.0 {
                        cfg.resolution = v as usize;
                    } else {
                        check.push("ray.resolution", "integer >= 16");
                    }
                }
            }
            "epsilon" => {
                if let Some(v) = check.number("ray.epsilon", vals) {
                    if v >= 0.0 {
                        cfg.epsilon = v;
                    } else {
                        check.push("ray.epsilon", "must be >= 0");
                    }
                }
            }
            "slices" => {
                if let Some(v) = check.number("ray.slices", vals) {
                    if v >= 3.0 && v.fract() == 0.0 {
                        cfg.slices = v as usize;
                    } else {
                        check.push("ray.slices", "integer >= 3");
                    }
                }
            }
            "r_in" => {
                if let Some(v) = check.number("ray.r_in", vals) {
                    cfg.r_in = v;
                }
            }
            "r_out" => {
                if let Some(v) = check.number("ray.r_out", vals) {
                    cfg.r_out = v;
                }
            }
            "f" => match vals.as_slice() {
                [Value::Text(s)] => cfg.f.push(s.clone()),
                _ => check.push("ray.f", "expected a quoted monomial"),
            },
            other => check.push(&format!("ray.{other}"), "unknown key"),
        }
    }
    if cfg.f.is_empty() {
        check.push("ray.f", "two monomial components required");
    }
    if !(cfg.r_in > 0.0 && cfg.r_out > cfg.r_in) {
        check.push("ray.r_in", "need 0 < r_in < r_out");
    }
    if cfg.depth <= 0.0 || cfg.s_half <= 0.0 {
        check.push("ray.depth", "depth and s_half must be > 0");
    }
    Some(cfg)
}

fn parse_blowup(check: &mut Check, vals: &[Value]) -> Option<BlowupCfg> {
    let entries = block(check, "blowup", vals)?;
    let mut cfg = BlowupCfg {
        samples: 33,
        zeta_max: 1.0,
        theta_max: 2.0,
        r_in: 0.4,
        r_out: 0.9,
        lambda_instances: 100,
    };
    for (_, key, vals) in entries {
        match key.as_str() {
            "samples" => {
                if let Some(v) = check.number("blowup.samples", vals) {
                    if v >= 3.0 && v.fract() == 0.0 {
                        cfg.samples = v as usize;
                    } else {
                        check.push("blowup.samples", "integer >= 3");
                    }
                }
            }
            "zeta_max" => {
                if let Some(v) = check.number("blowup.zeta_max", vals) {
                    cfg.zeta_max = v;
                }
            }
            "theta_max" => {
                if let Some(v) = check.number("blowup.theta_max", vals) {
                    cfg.theta_max = v;
                }
            }
            "r_in" => {
                if let Some(v) = check.number("blowup.r_in", vals) {
                    cfg.r_in = v;
                }
            }
            "r_out" => {
                if let Some(v) = check.number("blowup.r_out", vals) {
                    cfg.r_out = v;
                }
            }
            "lambda_instances" => {
                if let Some(v) = check.number("blowup.lambda_instances", vals) {
                    if v >= 1.0 && v.fract() == 0.0 {
                        cfg.lambda_instances = v as usize;
                    } else {
                        check.push("blowup.lambda_instances", "positive integer");
                    }
                }
            }
            other => check.push(&format!("blowup.{other}"), "unknown key"),
        }
    }
    if cfg.zeta_max <= 0.0 || cfg.theta_max <= 0.0 {
        check.push("blowup.zeta_max", "box extents must be > 0");
    }
    if !(cfg.r_in > 0.0 && cfg.r_out > cfg.r_in) {
        check.push("blowup.r_in", "need 0 < r_in < r_out");
    }
    Some(cfg)
}

fn validate_cross(
    check: &mut Check,
    command: Command,
    green: &Option<GreenCfg>,
    torus: &Option<TorusCfg>,
    ray: &Option<RayCfg>,
    blowup: &Option<BlowupCfg>,
    suite: &Option<String>,
) {
    match command {
        Command::Green => {
            if let Some(g) = green {
                validate_green(check, g);
            }
        }
        Command::Torus => {
            if torus.is_none() {
                check.push("torus", "missing block for the torus command");
            }
            if let Some(t) = torus {
                if t.n == 2 && t.resolution > 24 {
                    check.push("torus.resolution", "n = 2 solves are capped at resolution 24");
                }
            }
        }
        Command::Ray => {
            if ray.is_none() {
                check.push("ray", "missing block for the ray command");
            } else if let Some(r) = ray {
                if r.f.len() != 2 {
                    check.push("ray.f", "exactly two monomial components");
                }
                for (i, m) in r.f.iter().enumerate() {
                    if parse_ray_monomial(m).is_none() {
                        check.push(&format!("ray.f[{i}]"), "not a monomial in z, w");
                    }
                }
            }
        }
        Command::Blowup => {
            if blowup.is_none() {
                check.push("blowup", "missing block for the blowup command");
            }
        }
        Command::Verify => {
            match suite.as_deref() {
                Some("oracles-1d" | "oracles-2d" | "lemmas" | "torus" | "ray") => {}
                Some(other) => check.push("suite", format!("unknown suite {other}")),
                None => check.push("suite", "missing for the verify command"),
            }
        }
    }
    if command != Command::Torus && torus.is_some() {
        check.push("torus", "block only valid for the torus command");
    }
    if command != Command::Ray && ray.is_some() {
        check.push("ray", "block only valid for the ray command");
    }
    if command != Command::Blowup && blowup.is_some() {
        check.push("blowup", "block only valid for the blowup command");
    }
    if command != Command::Verify && suite.is_some() {
        check.push("suite", "only valid for the verify command");
    }
}

fn validate_green(check: &mut Check, g: &GreenCfg) {
    let n = match g.domain.kind {
        DomainKindCfg::Disk | DomainKindCfg::Annulus | DomainKindCfg::Torus1 => 1,
        _ => 2,
    };
    if matches!(g.domain.kind, DomainKindCfg::Torus1 | DomainKindCfg::Torus2) {
        check.push("domain.kind", "green solves need a boundary; use the torus command");
    }
    if g.domain.kind == DomainKindCfg::Annulus && g.domain.inner >= g.domain.radius {
        check.push("domain.inner", "must be below the outer radius");
    }
    if g.poles.is_empty() && g.background.base == BackgroundBaseCfg::Zero
        && matches!(g.background.augmentation, Augmentation::Fixed(a) if a == 0.0)
    {
        check.push("background", "zero base with zero augmentation and no poles is degenerate");
    }
    for (i, p) in g.poles.iter().enumerate() {
        if p.position.len() != 2 * n {
            check.push(&format!("pole[{i}].position"), format!("expected {} coordinates", 2 * n));
        }
        if p.f.len() != n {
            check.push(&format!("pole[{i}].f"), format!("expected {n} components"));
        }
        for (j, src) in p.f.iter().enumerate() {
            if parse_poly(src, n).is_err() {
                check.push(&format!("pole[{i}].f[{j}]"), "does not parse as a polynomial");
            }
        }
        if p.r_out >= g.domain.radius {
            check.push(&format!("pole[{i}].r_out"), "pole ball leaves the domain");
        }
        // disjointness of pole balls (the full certificate runs again in
        // the core validator; duplicates are caught here early)
        for (j, q) in g.poles.iter().enumerate().skip(i + 1) {
            let m = p.position.len().min(q.position.len());
            let dist: f64 = p.position[..m]
                .iter()
                .zip(&q.position[..m])
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            if dist <= p.r_out + q.r_out {
                check.push(
                    &format!("pole[{j}].position"),
                    format!("ball overlaps pole[{i}] (pairwise disjoint balls required)"),
                );
            }
        }
    }
}

// ---------------------------------------------------------------------
// polynomial and monomial parsing

/// Parses a polynomial in `z` (one variable) or `z1`, `z2` (two variables)
/// with real or imaginary numeric coefficients, e.g. "z", "z1^2 + z2^2",
/// "2*z^3 - i*z", "(1+2i)*z1*z2".
pub fn parse_poly(src: &str, nvars: usize) -> Result<Poly, String> {
    let mut terms: Vec<(C64, [u32; 2])> = Vec::new();
    let bytes: Vec<char> = src.chars().filter(|c| !c.is_whitespace()).collect();
    let mut pos = 0usize;
    let mut sign = 1.0;
    if pos < bytes.len() && (bytes[pos] == '+' || bytes[pos] == '-') {
        sign = if bytes[pos] == '-' { -1.0 } else { 1.0 };
        pos += 1;
    }
    loop {
        let (coeff, exps, next) = parse_term(&bytes, pos, nvars)?;
        terms.push((coeff * sign, exps));
        pos = next;
        if pos >= bytes.len() {
            break;
        }
        sign = match bytes[pos] {
            '+' => 1.0,
            '-' => -1.0,
            other => return Err(format!("expected + or - at {pos}, found {other}")),
        };
        pos += 1;
        if pos >= bytes.len() {
            return Err("dangling sign".into());
        }
    }
    Ok(Poly::new(nvars, terms))
}

fn parse_term(b: &[char], mut pos: usize, nvars: usize) -> Result<(C64, [u32; 2], usize), String> {
    let mut coeff = C64::new(1.0, 0.0);
    let mut exps = [0u32; 2];
    let mut saw_factor = false;
    loop {
        if pos >= b.len() {
            break;
        }
        match b[pos] {
            '(' => {
                // (a+bi) or (a-bi)
                let close = b[pos..].iter().position(|&c| c == ')').ok_or("unclosed paren")?
                    + pos;
                let inner: String = b[pos + 1..close].iter().collect();
                coeff *= parse_complex(&inner)?;
                pos = close + 1;
                saw_factor = true;
            }
            'i' if pos + 1 >= b.len() || !b[pos + 1].is_ascii_alphanumeric() => {
                coeff *= C64::new(0.0, 1.0);
                pos += 1;
                saw_factor = true;
            }
            'z' | 'w' => {
                let (var, adv) = parse_var(&b[pos..], nvars)?;
                pos += adv;
                let mut exp = 1u32;
                if pos < b.len() && b[pos] == '^' {
                    pos += 1;
                    let (v, adv) = parse_uint(&b[pos..])?;
                    exp = v;
                    pos += adv;
                }
                exps[var] += exp;
                saw_factor = true;
            }
            c if c.is_ascii_digit() || c == '.' => {
                let (v, adv) = parse_float(&b[pos..])?;
                pos += adv;
                if pos < b.len() && b[pos] == 'i' {
                    coeff *= C64::new(0.0, v);
                    pos += 1;
                } else {
                    coeff *= v;
                }
                saw_factor = true;
            }
            '*' => {
                pos += 1;
                continue;
            }
            '+' | '-' => break,
            other => return Err(format!("unexpected {other} at {pos}")),
        }
        // implicit multiplication continues the term
    }
    if !saw_factor {
        return Err("empty term".into());
    }
    Ok((coeff, exps, pos))
}

fn parse_var(b: &[char], nvars: usize) -> Result<(usize, usize), String> {
    match b[0] {
        'z' if nvars == 1 => {
            if b.len() > 1 && b[1].is_ascii_digit() {
                Err("one-variable polynomial uses plain z".into())
            } else {
                Ok((0, 1))
            }
        }
        'z' if nvars == 2 => {
            if b.len() > 1 && (b[1] == '1' || b[1] == '2') {
                Ok(((b[1] as usize) - ('1' as usize), 2))
            } else {
                Err("two-variable polynomial uses z1, z2".into())
            }
        }
        'w' => Err("w is only valid in ray monomials".into()),
        other => Err(format!("unknown variable {other}")),
    }
}

fn parse_uint(b: &[char]) -> Result<(u32, usize), String> {
    let mut end = 0;
    while end < b.len() && b[end].is_ascii_digit() {
        end += 1;
    }
    if end == 0 {
        return Err("expected an integer exponent".into());
    }
    let s: String = b[..end].iter().collect();
    s.parse::<u32>().map(|v| (v, end)).map_err(|e| e.to_string())
}

fn parse_float(b: &[char]) -> Result<(f64, usize), String> {
    let mut end = 0;
    while end < b.len() && (b[end].is_ascii_digit() || b[end] == '.') {
        end += 1;
    }
    // exponent part
    if end < b.len() && (b[end] == 'e' || b[end] == 'E') {
        let mut e2 = end + 1;
        if e2 < b.len() && (b[e2] == '+' || b[e2] == '-') {
            e2 += 1;
        }
        let digits = b[e2..].iter().take_while(|c| c.is_ascii_digit()).count();
        if digits > 0 {
            end = e2 + digits;
        }
    }
    let s: String = b[..end].iter().collect();
    s.parse::<f64>().map(|v| (v, end)).map_err(|e| e.to_string())
}

fn parse_complex(s: &str) -> Result<C64, String> {
    // forms: a, ai, a+bi, a-bi
    let chars: Vec<char> = s.chars().collect();
    let (re, mut pos) = parse_signed_float(&chars, 0)?;
    if pos >= chars.len() {
        return Ok(C64::new(re, 0.0));
    }
    if chars[pos] == 'i' && pos + 1 == chars.len() {
        return Ok(C64::new(0.0, re));
    }
    let sign = match chars[pos] {
        '+' => 1.0,
        '-' => -1.0,
        other => return Err(format!("bad complex literal near {other}")),
    };
    pos += 1;
    let (im, pos2) = parse_signed_float(&chars, pos)?;
    if pos2 < chars.len() && chars[pos2] == 'i' && pos2 + 1 == chars.len() {
        Ok(C64::new(re, sign * im))
    } else {
        Err("complex literal must end with i".into())
    }
}

fn parse_signed_float(b: &[char], mut pos: usize) -> Result<(f64, usize), String> {
    let mut sign = 1.0;
    if pos < b.len() && (b[pos] == '+' || b[pos] == '-') {
        sign = if b[pos] == '-' { -1.0 } else { 1.0 };
        pos += 1;
    }
    let (v, adv) = parse_float(&b[pos..])?;
    Ok((sign * v, pos + adv))
}

/// Parses a ray monomial like "z", "w^2", "2*z^3" into
/// (modulus, deg_z, deg_w).
pub fn parse_ray_monomial(src: &str) -> Option<(f64, u32, u32)> {
    let b: Vec<char> = src.chars().filter(|c| !c.is_whitespace()).collect();
    let mut modulus = 1.0f64;
    let mut deg_z = 0u32;
    let mut deg_w = 0u32;
    let mut pos = 0usize;
    let mut saw = false;
    while pos < b.len() {
        match b[pos] {
            'z' | 'w' => {
                let which = b[pos];
                pos += 1;
                let mut exp = 1u32;
                if pos < b.len() && b[pos] == '^' {
                    pos += 1;
                    let (v, adv) = parse_uint(&b[pos..]).ok()?;
                    exp = v;
                    pos += adv;
                }
                if which == 'z' {
                    deg_z += exp;
                } else {
                    deg_w += exp;
                }
                saw = true;
            }
            '*' => pos += 1,
            c if c.is_ascii_digit() || c == '.' => {
                let (v, adv) = parse_float(&b[pos..]).ok()?;
                modulus *= v;
                pos += adv;
                saw = true;
            }
            _ => return None,
        }
    }
    if saw && modulus > 0.0 {
        Some((modulus, deg_z, deg_w))
    } else {
        None
    }
}

// ---------------------------------------------------------------------
// canonical serialization

pub fn serialize(cfg: &RunConfig) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "version {}", cfg.version);
    let _ = writeln!(s, "command {}", cfg.command.name());
    let _ = writeln!(s, "seed {}", cfg.seed);
    if let Some(out) = &cfg.out_dir {
        let _ = writeln!(s, "out \"{out}\"");
    }
    if let Some(suite) = &cfg.suite {
        let _ = writeln!(s, "suite {suite}");
    }
    if let Some(g) = &cfg.green {
        let kind = match g.domain.kind {
            DomainKindCfg::Disk => "disk",
            DomainKindCfg::Annulus => "annulus",
            DomainKindCfg::Ball => "ball",
            DomainKindCfg::Polydisk => "polydisk",
            DomainKindCfg::Torus1 => "torus1",
            DomainKindCfg::Torus2 => "torus2",
        };
        let _ = write!(s, "domain {{ kind {kind} radius {} ", fmt_num(g.domain.radius));
        if g.domain.kind == DomainKindCfg::Annulus {
            let _ = write!(s, "inner {} ", fmt_num(g.domain.inner));
        }
        let _ = writeln!(s, "resolution {} }}", g.domain.resolution);
        let base = match g.background.base {
            BackgroundBaseCfg::Flat => "flat",
            BackgroundBaseCfg::Zero => "zero",
            BackgroundBaseCfg::FubiniStudy => "fubini-study",
        };
        let aug = match &g.background.augmentation {
            Augmentation::Auto => "auto".to_string(),
            Augmentation::Fixed(a) => fmt_num(*a),
        };
        let _ = writeln!(s, "background {{ base {base} augmentation {aug} }}");
        let _ = writeln!(s, "boundary {{ value {} }}", fmt_num(g.boundary_value));
        let backend = match g.solver.backend {
            BackendCfg::Envelope => "envelope",
            BackendCfg::Regularized => "regularized",
            BackendCfg::Both => "both",
        };
        let _ = writeln!(
            s,
            "solver {{ backend {backend} tol_fix {} max_sweeps {} excision_cells {} t0 {} t_ratio {} t_min {} }}",
            fmt_num(g.solver.tol_fix),
            g.solver.max_sweeps,
            fmt_num(g.solver.excision_cells),
            fmt_num(g.solver.t0),
            fmt_num(g.solver.t_ratio),
            fmt_num(g.solver.t_min),
        );
        for p in &g.poles {
            let _ = write!(s, "pole {{ position");
            for x in &p.position {
                let _ = write!(s, " {}", fmt_num(*x));
            }
            let _ = write!(s, " epsilon {}", fmt_num(p.epsilon));
            for f in &p.f {
                let _ = write!(s, " f \"{f}\"");
            }
            let _ = writeln!(s, " r_in {} r_out {} }}", fmt_num(p.r_in), fmt_num(p.r_out));
        }
    }
    if let Some(t) = &cfg.torus {
        let _ = write!(
            s,
            "torus {{ n {} resolution {} epsilon {} sigma_cells {} pole",
            t.n,
            t.resolution,
            fmt_num(t.epsilon),
            fmt_num(t.sigma_cells)
        );
        for x in &t.pole {
            let _ = write!(s, " {}", fmt_num(*x));
        }
        match &t.density {
            DensityCfg::Uniform => {
                let _ = writeln!(s, " density uniform }}");
            }
            DensityCfg::Cosine { amp, kx, ky } => {
                let _ = writeln!(s, " density cosine {} {} {} }}", fmt_num(*amp), kx, ky);
            }
        }
    }
    if let Some(r) = &cfg.ray {
        let _ = write!(
            s,
            "ray {{ depth {} s_half {} resolution {} epsilon {} slices {} r_in {} r_out {}",
            fmt_num(r.depth),
            fmt_num(r.s_half),
            r.resolution,
            fmt_num(r.epsilon),
            r.slices,
            fmt_num(r.r_in),
            fmt_num(r.r_out)
        );
        for f in &r.f {
            let _ = write!(s, " f \"{f}\"");
        }
        let _ = writeln!(s, " }}");
    }
    if let Some(b) = &cfg.blowup {
        let _ = writeln!(
            s,
            "blowup {{ samples {} zeta_max {} theta_max {} r_in {} r_out {} lambda_instances {} }}",
            b.samples,
            fmt_num(b.zeta_max),
            fmt_num(b.theta_max),
            fmt_num(b.r_in),
            fmt_num(b.r_out),
            b.lambda_instances
        );
    }
    s
}

/// Shortest decimal that round-trips through f64.
pub fn fmt_num(v: f64) -> String {
    let simple = format!("{v}");
    if simple.parse::<f64>() == Ok(v) {
        simple
    } else {
        format!("{v:e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL_GREEN: &str = r#"
        version 1
        command green
        domain { kind disk radius 1.0 resolution 64 }
        pole { position 0.0 0.0 epsilon 0.5 f "z" r_in 0.15 r_out 0.45 }
    "#;

    #[test]
    fn minimal_green_fills_defaults() {
        let cfg = parse_config(MINIMAL_GREEN).unwrap();
        assert_eq!(cfg.command, Command::Green);
        let g = cfg.green.unwrap();
        assert_eq!(g.solver.backend, BackendCfg::Envelope);
        assert_eq!(g.solver.max_sweeps, 100_000);
        assert_eq!(g.background.base, BackgroundBaseCfg::Zero);
        assert_eq!(g.boundary_value, 0.0);
        assert_eq!(g.poles.len(), 1);
    }

    #[test]
    fn negative_epsilon_rejected_with_field() {
        let bad = MINIMAL_GREEN.replace("epsilon 0.5", "epsilon -1");
        match parse_config(&bad) {
            Err(ConfigError::Validation(issues)) => {
                assert!(issues.iter().any(|i| i.field.contains("epsilon")
                    && i.constraint.contains("> 0")), "{issues:?}");
            }
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_pole_positions_rejected() {
        let two = MINIMAL_GREEN.replace(
            r#"pole { position 0.0 0.0 epsilon 0.5 f "z" r_in 0.15 r_out 0.45 }"#,
            r#"pole { position 0.0 0.0 epsilon 0.3 f "z" r_in 0.1 r_out 0.2 }
               pole { position 0.05 0.0 epsilon 0.3 f "z" r_in 0.1 r_out 0.2 }"#,
        );
        match parse_config(&two) {
            Err(ConfigError::Validation(issues)) => {
                assert!(issues.iter().any(|i| i.constraint.contains("disjoint")), "{issues:?}");
            }
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_keys_are_fatal_and_all_reported() {
        let bad = MINIMAL_GREEN.replace("version 1", "version 1\n tolerance_typo 3");
        let bad = bad.replace("radius 1.0", "radius 1.0 wobble 2");
        match parse_config(&bad) {
            Err(ConfigError::Validation(issues)) => {
                assert!(issues.iter().any(|i| i.field == "tolerance_typo"));
                assert!(issues.iter().any(|i| i.field == "domain.wobble"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn parse_error_carries_position() {
        match parse_config("version 1 command green domain { kind disk ???") {
            Err(ConfigError::Parse { position, .. }) => assert!(position > 0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn poly_parsing_cases() {
        let p = parse_poly("z", 1).unwrap();
        assert_eq!(p.terms.len(), 1);
        let p = parse_poly("z1^2 + z2^2", 2).unwrap();
        assert_eq!(p.terms.len(), 2);
        let p = parse_poly("2*z^3 - i*z", 1).unwrap();
        assert_eq!(p.terms.len(), 2);
        assert!((p.terms[1].0 - C64::new(0.0, -1.0)).norm() < 1e-15);
        let p = parse_poly("(1+2i)*z1*z2", 2).unwrap();
        assert!((p.terms[0].0 - C64::new(1.0, 2.0)).norm() < 1e-15);
        assert_eq!(p.terms[0].1, [1, 1]);
        assert!(parse_poly("z3", 2).is_err());
        assert!(parse_poly("q", 1).is_err());
    }

    #[test]
    fn ray_monomials() {
        assert_eq!(parse_ray_monomial("z"), Some((1.0, 1, 0)));
        assert_eq!(parse_ray_monomial("w^2"), Some((1.0, 0, 2)));
        assert_eq!(parse_ray_monomial("2*z^3"), Some((2.0, 3, 0)));
        assert_eq!(parse_ray_monomial("z+w"), None);
    }

    #[test]
    fn round_trip_canonical() {
        let cfg = parse_config(MINIMAL_GREEN).unwrap();
        let text = serialize(&cfg);
        let cfg2 = parse_config(&text).unwrap();
        assert_eq!(cfg, cfg2);
    }

    #[test]
    fn verify_command_needs_known_suite() {
        let ok = parse_config("version 1\ncommand verify\nsuite lemmas");
        assert!(ok.is_ok());
        match parse_config("version 1\ncommand verify\nsuite bogus") {
            Err(ConfigError::Validation(issues)) => {
                assert!(issues.iter().any(|i| i.field == "suite"));
            }
            other => panic!("{other:?}"),
        }
    }
}
