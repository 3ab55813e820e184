//! The shipped corpus of accepted (certificate, program) pairs.
//!
//! A corpus directory holds a `manifest` file and the certificate and
//! program files it names. The manifest is one S-expression:
//!
//! ```text
//! (corpus
//!   (entry countdown (verifier "tower 0") (cert "countdown.cert") (program "countdown.prog"))
//!   ...)
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::lang::{parse_program, Program};
use crate::proof::{parse_certificate, Certificate};
use crate::sexp::{self, arity, ParseError};
use crate::tower::{parse_desc, DescError, VerifierDesc};

#[derive(Debug, Clone)]
pub struct Entry {
    pub name: String,
    pub verifier: VerifierDesc,
    pub certificate: Certificate,
    pub program: Program,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Syntax { path: PathBuf, source: ParseError },
    #[error("{path}: {source}")]
    Descriptor { path: PathBuf, source: DescError },
}

/// Directory of the corpus shipped with this crate.
pub fn shipped_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus")
}

pub fn shipped() -> Result<Vec<Entry>, CorpusError> {
    load(&shipped_dir())
}

fn read(path: &Path) -> Result<String, CorpusError> {
    fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_owned(),
        source,
    })
}

pub fn load(dir: &Path) -> Result<Vec<Entry>, CorpusError> {
    let manifest = dir.join("manifest");
    let text = read(&manifest)?;
    let syntax = |source| CorpusError::Syntax {
        path: manifest.clone(),
        source,
    };
    let root = sexp::read(&text).map_err(syntax)?;
    let (head, entries) = root.expect_form().map_err(syntax)?;
    if head != "corpus" {
        return Err(syntax(root.error("expected (corpus ...)")));
    }
    let mut out = Vec::with_capacity(entries.len());
    for form in entries {
        let (head, args) = form.expect_form().map_err(syntax)?;
        if head != "entry" {
            return Err(syntax(form.error("expected (entry ...)")));
        }
        let args = arity(form, "entry", args, 4).map_err(syntax)?;
        let name = args[0].expect_name().map_err(syntax)?.to_string();
        let field = |i: usize, key: &str| -> Result<String, CorpusError> {
            let (head, inner) = args[i].expect_form().map_err(syntax)?;
            if head != key {
                return Err(syntax(args[i].error(format!("expected ({key} \"...\")"))));
            }
            let inner = arity(&args[i], key, inner, 1).map_err(syntax)?;
            Ok(inner[0].expect_str().map_err(syntax)?.to_string())
        };
        let verifier_text = field(1, "verifier")?;
        let verifier = parse_desc(&verifier_text).map_err(|source| CorpusError::Descriptor {
            path: manifest.clone(),
            source,
        })?;
        let cert_path = dir.join(field(2, "cert")?);
        let certificate = parse_certificate(&read(&cert_path)?).map_err(|source| CorpusError::Syntax {
            path: cert_path.clone(),
            source,
        })?;
        let program_path = dir.join(field(3, "program")?);
        let program = parse_program(&read(&program_path)?).map_err(|source| CorpusError::Syntax {
            path: program_path.clone(),
            source,
        })?;
        out.push(Entry {
            name,
            verifier,
            certificate,
            program,
        });
    }
    Ok(out)
}
