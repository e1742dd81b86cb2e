use std::fmt;
use std::str::FromStr;

use qmlab_core::qmring::{delta_poly, derive_n, eisenstein_poly};
use qmlab_core::QmPoly;

use crate::parse::parse_form;
use crate::CliError;

pub const BUILTIN_NAMES: &str = "E4, E6, E8, E10, E14, delta, eisenstein:k";

/// A form named on the command line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FormSpec {
    /// `E<k>` or `eisenstein:k`.
    Eisenstein(u32),
    Delta,
    Literal(String),
}

impl FormSpec {
    pub fn resolve(&self) -> Result<QmPoly, CliError> {
        Ok(match self {
            FormSpec::Eisenstein(k) => eisenstein_poly(*k)?,
            FormSpec::Delta => delta_poly(),
            FormSpec::Literal(text) => parse_form(text)?,
        })
    }
}

impl fmt::Display for FormSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FormSpec::Eisenstein(k) => write!(f, "E{k}"),
            FormSpec::Delta => f.write_str("delta"),
            FormSpec::Literal(text) => f.write_str(text.trim()),
        }
    }
}

fn eisenstein_weight(text: &str, digits: &str) -> Result<FormSpec, CliError> {
    let k: u32 = digits
        .parse()
        .map_err(|_| CliError::Usage(format!("bad Eisenstein weight in {text:?}")))?;
    if k < 4 || k % 2 == 1 {
        return Err(CliError::Usage(format!(
            "Eisenstein weight must be even and >= 4, got {k}"
        )));
    }
    Ok(FormSpec::Eisenstein(k))
}

impl FromStr for FormSpec {
    type Err = CliError;

    fn from_str(text: &str) -> Result<Self, CliError> {
        let t = text.trim();
        if let Some(k) = t.strip_prefix("eisenstein:") {
            return eisenstein_weight(t, k);
        }
        if let Some(k) = t.strip_prefix('E') {
            if !k.is_empty() && k.bytes().all(|b| b.is_ascii_digit()) {
                return eisenstein_weight(t, k);
            }
        }
        if t == "delta" {
            return Ok(FormSpec::Delta);
        }
        if t.starts_with(|c: char| c.is_ascii_alphabetic() && !matches!(c, 'P' | 'Q' | 'R')) {
            return Err(CliError::Usage(format!(
                "unknown form {t:?}; built-ins are {BUILTIN_NAMES}, or give a polynomial in P, Q, R"
            )));
        }
        parse_form(t)?;
        Ok(FormSpec::Literal(t.to_string()))
    }
}

/// `--form F` or `--form-deriv F:n` resolved to a polynomial and a label.
#[derive(Clone, Debug)]
pub struct Form {
    pub label: String,
    pub poly: QmPoly,
}

impl Form {
    pub fn plain(spec: &FormSpec) -> Result<Self, CliError> {
        Ok(Form {
            label: spec.to_string(),
            poly: spec.resolve()?,
        })
    }

    /// Parses `F:n` into `D^n F`; the split is at the last colon.
    pub fn derived(text: &str) -> Result<Self, CliError> {
        let (base, n) = text.rsplit_once(':').ok_or_else(|| {
            CliError::Usage(format!("--form-deriv expects FORM:n, got {text:?}"))
        })?;
        let n: u64 = n
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("bad derivative order in {text:?}")))?;
        let spec: FormSpec = base.parse()?;
        let poly = derive_n(&spec.resolve()?, n)?;
        Ok(Form {
            label: format!("D^{n}({spec})"),
            poly,
        })
    }

    pub fn from_flags(form: Option<&str>, form_deriv: Option<&str>) -> Result<Self, CliError> {
        match (form, form_deriv) {
            (Some(f), None) => Form::plain(&f.parse()?),
            (None, Some(d)) => Form::derived(d),
            (Some(_), Some(_)) => Err(CliError::Usage("give only one of --form and --form-deriv".into())),
            (None, None) => Err(CliError::Usage("one of --form or --form-deriv is required".into())),
        }
    }
}
