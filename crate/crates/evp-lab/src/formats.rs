//! On-disk formats: periodic functions and environment configs as JSON,
//! curve tables as RFC-4180 CSV with a manifest-digest comment line.

use std::fs;
use std::path::Path;

use anyhow::{anyhow, Context, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use evp_core::environment::Environment;
use evp_core::periodic::PeriodicFunction;

use crate::alpha_spec::parse_alpha;

/// `{"degree": K, "coefficients": [[re, im], ...]}` ordered k = -K..K.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeriodicFunctionJson {
    pub degree: usize,
    pub coefficients: Vec<[f64; 2]>,
}

impl PeriodicFunctionJson {
    pub fn from_function(f: &PeriodicFunction) -> Self {
        PeriodicFunctionJson {
            degree: f.degree(),
            coefficients: f.coeffs().iter().map(|c| [c.re, c.im]).collect(),
        }
    }

    pub fn into_function(self) -> Result<PeriodicFunction> {
        let coeffs: Vec<Complex64> =
            self.coefficients.iter().map(|c| Complex64::new(c[0], c[1])).collect();
        PeriodicFunction::from_coefficients(self.degree, coeffs)
            .map_err(|e| anyhow!("invalid periodic function: {e}"))
    }
}

pub fn read_function(path: &Path) -> Result<PeriodicFunction> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let parsed: PeriodicFunctionJson = serde_json::from_str(&text)
        .with_context(|| format!("parsing {}", path.display()))?;
    parsed.into_function()
}

pub fn write_function(path: &Path, f: &PeriodicFunction) -> Result<()> {
    let json = serde_json::to_string_pretty(&PeriodicFunctionJson::from_function(f))?;
    fs::write(path, json).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Environment configuration: rotation spec, jump-probability coefficients,
/// and the construction tolerance.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvConfig {
    /// Alpha spec string (see the alpha parser) or decimal.
    pub alpha: String,
    /// Coefficients of p ordered k = -K..K.
    pub p_coefficients: Vec<[f64; 2]>,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// Expansion depth for the rotation number (defaults to 40).
    #[serde(default = "default_depth")]
    pub depth: usize,
}

fn default_tolerance() -> f64 {
    1e-9
}

fn default_depth() -> usize {
    40
}

impl EnvConfig {
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn build(&self, precision_bits: u32) -> Result<(Environment, f64)> {
        let parsed = parse_alpha(&self.alpha, self.depth, precision_bits)?;
        if self.p_coefficients.len() % 2 != 1 {
            return Err(anyhow!("p_coefficients must have odd length 2K+1"));
        }
        let degree = self.p_coefficients.len() / 2;
        let coeffs: Vec<Complex64> =
            self.p_coefficients.iter().map(|c| Complex64::new(c[0], c[1])).collect();
        let p = PeriodicFunction::from_coefficients(degree, coeffs)
            .map_err(|e| anyhow!("invalid p: {e}"))?;
        let env = Environment::classify(parsed.rotation, p)?;
        Ok((env, self.tolerance))
    }
}

/// CSV writer with the leading `# evp-lab ...` comment carrying the
/// generating manifest's config digest. Numeric-only tables need no
/// quoting to stay RFC-4180 clean.
pub struct CsvTable {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: Vec<&'static str>) -> Self {
        CsvTable { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self, command: &str, config_digest: &str) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "# evp-lab {command} manifest={config_digest} units=dimensionless\n"
        ));
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: &Path, command: &str, config_digest: &str) -> Result<()> {
        fs::write(path, self.render(command, config_digest))
            .with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }
}

/// Expand `a..b` (dyadic doubling), `a,b,c`, and `a,b,...,z` (doubling fill)
/// into a sorted list.
pub fn parse_range_list(spec: &str) -> Result<Vec<usize>> {
    let mut out: Vec<usize> = Vec::new();
    if let Some((a, b)) = spec.split_once("..") {
        if !a.is_empty() && !b.is_empty() && !a.contains(',') && !b.contains(',') {
            let lo: usize = a.trim().parse().context("range start")?;
            let hi: usize = b.trim().parse().context("range end")?;
            if lo == 0 || hi < lo {
                return Err(anyhow!("bad range {spec:?}"));
            }
            let mut v = lo;
            while v <= hi {
                out.push(v);
                v *= 2;
            }
            return Ok(out);
        }
    }
    let tokens: Vec<&str> = spec.split(',').map(str::trim).collect();
    let mut i = 0usize;
    while i < tokens.len() {
        let t = tokens[i];
        if t == "..." {
            let prev = *out
                .last()
                .ok_or_else(|| anyhow!("ellipsis without a preceding value"))?;
            let next: usize = tokens
                .get(i + 1)
                .ok_or_else(|| anyhow!("ellipsis without a following value"))?
                .parse()
                .context("value after ellipsis")?;
            let mut v = prev * 2;
            while v < next {
                out.push(v);
                v *= 2;
            }
            out.push(next);
            i += 2;
        } else {
            out.push(t.parse().with_context(|| format!("list entry {t:?}"))?);
            i += 1;
        }
    }
    if out.is_empty() {
        return Err(anyhow!("empty list {spec:?}"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_forms_expand() {
        assert_eq!(parse_range_list("64..512").unwrap(), vec![64, 128, 256, 512]);
        assert_eq!(parse_range_list("8,16,512").unwrap(), vec![8, 16, 512]);
        assert_eq!(
            parse_range_list("8,16,...,128").unwrap(),
            vec![8, 16, 32, 64, 128]
        );
    }

    #[test]
    fn function_round_trip() {
        let f = PeriodicFunction::from_cos_sin(0.5, &[(1.0, -0.25), (0.0, 0.125)]);
        let json = PeriodicFunctionJson::from_function(&f);
        assert_eq!(json.coefficients.len(), 2 * json.degree + 1);
        let back = serde_json::to_string(&json).unwrap();
        let parsed: PeriodicFunctionJson = serde_json::from_str(&back).unwrap();
        let g = parsed.into_function().unwrap();
        assert!(f.sub(&g).grid_sup() < 1e-15);
    }

    #[test]
    fn unknown_config_key_is_named() {
        let text = r#"{"alpha": "golden", "p_coefficients": [[0.5, 0.0]], "smoothing": 3}"#;
        let err = serde_json::from_str::<EnvConfig>(text).unwrap_err().to_string();
        assert!(err.contains("smoothing"), "{err}");
    }
}
