//! Text serialization of fitted GP models.
//!
//! The format is line-oriented and self-describing:
//!
//! ```text
//! dsekit-gp-model v1
//! name <objective name>
//! direction <min|max>
//! kernel <se <l> | matern <l> <nu>>
//! dimension <d>
//! noise_variance <v>
//! jitter <v>
//! standardization <y_mean> <y_std>
//! bounds <lo> <hi>              # one line per dimension
//! train_rows <n>
//! <x_1> ... <x_d> <y>           # one line per row; x normalized, y standardized
//! ```
//!
//! Numbers are written with Rust's shortest round-trip formatting, so a
//! save/load cycle reproduces the model bit-exactly.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::gp::{factorize_with_jitter, solve_cholesky, GpModel};
use crate::kernel::{build_covariance_symmetric, KernelFamily, KernelSpec};
use crate::space::Direction;

const MAGIC: &str = "dsekit-gp-model v1";

pub fn save_gp(gp: &GpModel, path: &Path) -> Result<()> {
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC}");
    let _ = writeln!(out, "name {}", gp.name);
    let _ = writeln!(out, "direction {}", gp.direction.as_str());
    match gp.kernel.family() {
        KernelFamily::SquaredExponential => {
            let _ = writeln!(out, "kernel se {}", gp.kernel.length_scale());
        }
        KernelFamily::Matern => {
            let _ = writeln!(
                out,
                "kernel matern {} {}",
                gp.kernel.length_scale(),
                gp.kernel.nu().expect("matern kernels carry nu")
            );
        }
    }
    let _ = writeln!(out, "dimension {}", gp.bounds.len());
    let _ = writeln!(out, "noise_variance {}", gp.noise_variance);
    let _ = writeln!(out, "jitter {}", gp.jitter);
    let _ = writeln!(out, "standardization {} {}", gp.y_mean, gp.y_std);
    for (lo, hi) in &gp.bounds {
        let _ = writeln!(out, "bounds {lo} {hi}");
    }
    let _ = writeln!(out, "train_rows {}", gp.x_train.len());
    for (row, y) in gp.x_train.iter().zip(&gp.y_train) {
        for v in row {
            let _ = write!(out, "{v} ");
        }
        let _ = writeln!(out, "{y}");
    }
    std::fs::write(path, out)?;
    Ok(())
}

struct Reader<'a> {
    path: String,
    lines: std::str::Lines<'a>,
    line_no: usize,
}

impl<'a> Reader<'a> {
    fn next_line(&mut self) -> Result<&'a str> {
        self.line_no += 1;
        self.lines
            .next()
            .ok_or_else(|| self.err("unexpected end of file"))
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::Format {
            path: self.path.clone(),
            line: self.line_no,
            message: message.into(),
        }
    }

    /// Consumes a `<keyword> value...` line, returning the value tokens.
    fn field(&mut self, keyword: &str) -> Result<Vec<&'a str>> {
        let line = self.next_line()?;
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some(k) if k == keyword => Ok(tokens.collect()),
            Some(other) => Err(self.err(format!("expected field {keyword:?}, found {other:?}"))),
            None => Err(self.err(format!("expected field {keyword:?}, found empty line"))),
        }
    }

    fn parse_f64(&self, token: &str) -> Result<f64> {
        token
            .parse::<f64>()
            .map_err(|_| self.err(format!("invalid number {token:?}")))
    }

    fn parse_usize(&self, token: &str) -> Result<usize> {
        token
            .parse::<usize>()
            .map_err(|_| self.err(format!("invalid count {token:?}")))
    }
}

pub fn load_gp(path: &Path) -> Result<GpModel> {
    let text = std::fs::read_to_string(path)?;
    load_gp_from_str(&text, &path.display().to_string())
}

pub fn load_gp_from_str(text: &str, origin: &str) -> Result<GpModel> {
    let mut r = Reader {
        path: origin.to_string(),
        lines: text.lines(),
        line_no: 0,
    };

    let magic = r.next_line()?;
    if magic.trim() != MAGIC {
        return Err(r.err(format!("expected header {MAGIC:?}, found {magic:?}")));
    }

    let name = r.field("name")?.join(" ");
    let direction_tokens = r.field("direction")?;
    let direction: Direction = direction_tokens
        .first()
        .ok_or_else(|| r.err("direction field is empty"))?
        .parse()
        .map_err(|_| r.err("direction must be min or max"))?;

    let kernel_tokens = r.field("kernel")?;
    let kernel = match kernel_tokens.as_slice() {
        ["se", l] => KernelSpec::squared_exponential(r.parse_f64(l)?)
            .map_err(|e| r.err(e.to_string()))?,
        ["matern", l, nu] => KernelSpec::matern(r.parse_f64(nu)?, r.parse_f64(l)?)
            .map_err(|e| r.err(e.to_string()))?,
        _ => return Err(r.err("kernel must be \"se <l>\" or \"matern <l> <nu>\"")),
    };

    let dim_tokens = r.field("dimension")?;
    let dimension = r.parse_usize(dim_tokens.first().ok_or_else(|| r.err("missing dimension"))?)?;
    if dimension == 0 {
        return Err(r.err("dimension must be at least 1"));
    }

    let noise_tokens = r.field("noise_variance")?;
    let noise_variance =
        r.parse_f64(noise_tokens.first().ok_or_else(|| r.err("missing noise variance"))?)?;

    let jitter_tokens = r.field("jitter")?;
    let jitter = r.parse_f64(jitter_tokens.first().ok_or_else(|| r.err("missing jitter"))?)?;

    let std_tokens = r.field("standardization")?;
    if std_tokens.len() != 2 {
        return Err(r.err("standardization needs exactly two values: mean and std"));
    }
    let y_mean = r.parse_f64(std_tokens[0])?;
    let y_std = r.parse_f64(std_tokens[1])?;
    if !(y_std.is_finite() && y_std > 0.0) {
        return Err(r.err(format!("standard deviation must be positive, got {y_std}")));
    }

    let mut bounds = Vec::with_capacity(dimension);
    for _ in 0..dimension {
        let b = r.field("bounds")?;
        if b.len() != 2 {
            return Err(r.err("bounds line needs exactly two values"));
        }
        bounds.push((r.parse_f64(b[0])?, r.parse_f64(b[1])?));
    }

    let rows_tokens = r.field("train_rows")?;
    let n_rows =
        r.parse_usize(rows_tokens.first().ok_or_else(|| r.err("missing row count"))?)?;
    if n_rows == 0 {
        return Err(r.err("model must have at least one training row"));
    }

    let mut x_train = Vec::with_capacity(n_rows);
    let mut y_train = Vec::with_capacity(n_rows);
    for _ in 0..n_rows {
        let line = r.next_line()?;
        let values = line
            .split_whitespace()
            .map(|t| r.parse_f64(t))
            .collect::<Result<Vec<f64>>>()?;
        if values.len() != dimension + 1 {
            return Err(r.err(format!(
                "training row has {} values, expected {} coordinates plus one observation",
                values.len(),
                dimension + 1
            )));
        }
        y_train.push(values[dimension]);
        x_train.push(values[..dimension].to_vec());
    }

    // Refactorize from the stored data. The stored jitter reproduces the
    // original factor; escalation only runs if the file was edited by hand.
    let k = build_covariance_symmetric(&kernel, &x_train);
    let n = k.nrows();
    let mut shifted = k.clone();
    for i in 0..n {
        shifted[(i, i)] += noise_variance + jitter;
    }
    let (chol, jitter) = match nalgebra::Cholesky::new(shifted) {
        Some(c) => (c.unpack(), jitter),
        None => factorize_with_jitter(&k, noise_variance)?,
    };
    let y_vec = nalgebra::DVector::from_vec(y_train.clone());
    let alpha = solve_cholesky(&chol, &y_vec);

    Ok(GpModel {
        name,
        kernel,
        direction,
        noise_variance,
        bounds,
        x_train,
        y_train,
        y_mean,
        y_std,
        jitter,
        chol,
        alpha,
    })
}
