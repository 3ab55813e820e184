//! Command-line interface.
//!
//! [`dispatch`] does all the work and returns the exit code with the text
//! destined for stdout and stderr, so it can be tested without a process.
//! Exit codes: 0 success or ACCEPT, 1 REJECT or nothing found, 2 usage or
//! parse errors.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rand::rngs::StdRng;
use rand::SeedableRng;

use crate::belief::{close, stronger_chain, BeliefBase};
use crate::generate;
use crate::lang::{parse_program, parse_value, run, Program, Value};
use crate::ordinal::{classify, compare, fundamental_sequence, parse_ordinal, Class, Ordinal};
use crate::proof::{parse_certificate, Certificate};
use crate::sexp;
use crate::tower::{accepts_via_search, diag, enumerate_tower, parse_desc, strengthen, verify, TowerOracle, VerifierDesc};

pub const DEFAULT_FUEL: u64 = 1_000_000;
pub const DEFAULT_BUDGET: usize = 10_000;

#[derive(Debug, Parser)]
#[command(name = "omega-tower", version, about = "Fuel-bounded programs, termination certificates and ordinal verifier towers")]
struct Cli {
    /// Write standard output to FILE instead.
    #[arg(short = 'o', global = true, value_name = "FILE")]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct ProgramArg {
    /// Program text.
    #[arg(long)]
    program: Option<String>,
    #[arg(long, value_name = "FILE")]
    program_file: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ProofArg {
    /// Certificate text.
    #[arg(long)]
    proof: Option<String>,
    #[arg(long, value_name = "FILE")]
    proof_file: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the canonical form of a program, certificate, descriptor or ordinal.
    Fmt {
        #[command(flatten)]
        program: ProgramArg,
        #[command(flatten)]
        proof: ProofArg,
        #[arg(long)]
        verifier: Option<String>,
        #[arg(long)]
        ord: Option<String>,
    },
    /// Run a program on an input.
    Run {
        #[command(flatten)]
        program: ProgramArg,
        #[arg(long, default_value = "(nat 0)")]
        input: String,
        #[arg(long, default_value_t = DEFAULT_FUEL)]
        fuel: u64,
    },
    /// Check a certificate, or search for one when no proof is given.
    Check {
        #[arg(long)]
        verifier: String,
        #[command(flatten)]
        proof: ProofArg,
        #[command(flatten)]
        program: ProgramArg,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
    },
    /// Print the diagonal program of a verifier.
    Diag {
        #[arg(long)]
        verifier: String,
    },
    /// Print the strengthened verifier.
    Strengthen {
        #[arg(long)]
        verifier: String,
    },
    /// List the first N levels approximating a limit verifier.
    TowerEnum {
        #[arg(long)]
        ord: String,
        #[arg(long)]
        n: u64,
    },
    /// Ordinal notations.
    Ord {
        #[command(subcommand)]
        command: OrdCommand,
    },
    /// Belief bases.
    Belief {
        #[command(subcommand)]
        command: BeliefCommand,
    },
    /// Self-tests.
    Selftest {
        #[command(subcommand)]
        command: SelftestCommand,
    },
}

#[derive(Debug, Subcommand)]
enum OrdCommand {
    /// Print LESS, EQUAL or GREATER.
    Cmp { a: String, b: String },
    /// Print the n-th element of a limit's fundamental sequence.
    Fs { ord: String, n: u64 },
    /// Print zero, successor or limit.
    Classify { ord: String },
}

#[derive(Debug, Subcommand)]
enum BeliefCommand {
    /// Print the closure of a base file.
    Close {
        #[arg(long)]
        base: PathBuf,
        #[arg(long, default_value_t = 3)]
        depth: usize,
    },
    /// Derive strictly stronger trusted verifiers from a base file.
    Strengthen {
        #[arg(long)]
        base: PathBuf,
        #[arg(long)]
        verifier: String,
        /// Number of strengthening steps.
        #[arg(long, default_value_t = 1)]
        n: usize,
    },
}

#[derive(Debug, Subcommand)]
enum SelftestCommand {
    /// Run diag(v) and the subject program on their pair input and compare.
    Diagonal {
        #[arg(long)]
        verifier: String,
        #[command(flatten)]
        proof: ProofArg,
        #[command(flatten)]
        program: ProgramArg,
        #[arg(long, default_value_t = DEFAULT_FUEL)]
        fuel: u64,
    },
    /// Check verifier totality on random triples.
    Fuzz {
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Debug)]
struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

type Res<T> = Result<T, Failure>;

fn either(name: &str, inline: &Option<String>, file: &Option<PathBuf>) -> Res<Option<String>> {
    match (inline, file) {
        (Some(_), Some(_)) => Err(Failure(format!("give either --{name} or --{name}-file, not both"))),
        (Some(text), None) => Ok(Some(text.clone())),
        (None, Some(path)) => fs::read_to_string(path)
            .map(Some)
            .map_err(|e| Failure(format!("{}: {e}", path.display()))),
        (None, None) => Ok(None),
    }
}

impl ProgramArg {
    fn text(&self) -> Res<Option<String>> {
        either("program", &self.program, &self.program_file)
    }

    fn required(&self) -> Res<Program> {
        let text = self.text()?.ok_or_else(|| Failure("missing --program or --program-file".into()))?;
        Ok(parse_program(&text)?)
    }
}

impl ProofArg {
    fn text(&self) -> Res<Option<String>> {
        either("proof", &self.proof, &self.proof_file)
    }

    fn optional(&self) -> Res<Option<Certificate>> {
        match self.text()? {
            Some(text) => Ok(Some(parse_certificate(&text)?)),
            None => Ok(None),
        }
    }
}

fn desc(text: &str) -> Res<VerifierDesc> {
    Ok(parse_desc(text)?)
}

fn ordinal(text: &str) -> Res<Ordinal> {
    Ok(parse_ordinal(text)?)
}

fn read_base(path: &PathBuf) -> Res<BeliefBase> {
    let text = fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    BeliefBase::parse(&text).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

struct Output {
    code: i32,
    stdout: String,
    stderr: String,
}

impl Output {
    fn new() -> Self {
        Output {
            code: 0,
            stdout: String::new(),
            stderr: String::new(),
        }
    }

    /// Appends `s` as whole lines; multi-line displays keep no trailing blank.
    fn line(&mut self, s: impl std::fmt::Display) {
        let text = s.to_string();
        self.stdout.push_str(text.trim_end_matches('\n'));
        self.stdout.push('\n');
    }
}

fn execute(command: &Command, out: &mut Output) -> Res<()> {
    match command {
        Command::Fmt {
            program,
            proof,
            verifier,
            ord,
        } => {
            let mut any = false;
            if let Some(text) = program.text()? {
                out.line(parse_program(&text)?);
                any = true;
            }
            if let Some(text) = proof.text()? {
                out.line(parse_certificate(&text)?);
                any = true;
            }
            if let Some(text) = verifier {
                out.line(desc(text)?);
                any = true;
            }
            if let Some(text) = ord {
                out.line(ordinal(text)?);
                any = true;
            }
            if !any {
                return Err(Failure("nothing to format".into()));
            }
        }
        Command::Run { program, input, fuel } => {
            let program = program.required()?;
            let input = parse_value(input)?;
            let result = run(&program, input, *fuel, &TowerOracle);
            out.code = if result.halted() { 0 } else { 1 };
            out.line(result);
        }
        Command::Check {
            verifier,
            proof,
            program,
            budget,
        } => {
            let v = desc(verifier)?;
            let cert = proof.optional()?;
            let program = program.required()?;
            match cert {
                Some(cert) => {
                    let result = verify(&v, &cert, &program);
                    out.code = if result.is_accept() { 0 } else { 1 };
                    out.line(result);
                }
                None => match accepts_via_search(&v, &program, *budget) {
                    Some(cert) => {
                        out.line("ACCEPT");
                        out.line(cert);
                    }
                    None => {
                        out.code = 1;
                        out.line("NONE");
                    }
                },
            }
        }
        Command::Diag { verifier } => out.line(diag(&desc(verifier)?)),
        Command::Strengthen { verifier } => out.line(strengthen(&desc(verifier)?)),
        Command::TowerEnum { ord, n } => {
            for level in enumerate_tower(&ordinal(ord)?, *n)? {
                out.line(VerifierDesc::Tower(level));
            }
        }
        Command::Ord { command } => match command {
            OrdCommand::Cmp { a, b } => out.line(match compare(&ordinal(a)?, &ordinal(b)?) {
                std::cmp::Ordering::Less => "LESS",
                std::cmp::Ordering::Equal => "EQUAL",
                std::cmp::Ordering::Greater => "GREATER",
            }),
            OrdCommand::Fs { ord, n } => out.line(fundamental_sequence(&ordinal(ord)?, *n)?),
            OrdCommand::Classify { ord } => match classify(&ordinal(ord)?) {
                Class::Zero => out.line("zero"),
                Class::Successor(p) => out.line(format_args!("successor {p}")),
                Class::Limit => out.line("limit"),
            },
        },
        Command::Belief { command } => match command {
            BeliefCommand::Close { base, depth } => {
                let closure = close(&read_base(base)?, *depth);
                for warning in &closure.warnings {
                    let _ = writeln!(out.stderr, "warning: {warning}");
                }
                out.line(&closure.beliefs);
            }
            BeliefCommand::Strengthen { base, verifier, n } => {
                let base = read_base(base)?;
                let chain = stronger_chain(&base, &desc(verifier)?, *n)?;
                for (w, trace) in chain {
                    out.line(&trace);
                    out.line(format_args!("STRONGER {}", sexp::quoted(&w.to_string())));
                }
            }
        },
        Command::Selftest { command } => match command {
            SelftestCommand::Diagonal {
                verifier,
                proof,
                program,
                fuel,
            } => {
                let v = desc(verifier)?;
                let cert_text = proof.text()?.ok_or_else(|| Failure("missing --proof or --proof-file".into()))?;
                let cert = parse_certificate(&cert_text)?;
                let subject = program.required()?;
                let check = verify(&v, &cert, &subject);
                if !check.is_accept() {
                    out.code = 1;
                    out.line(check);
                    return Ok(());
                }
                let input = Value::pair(Value::str(&cert.to_string()), Value::str(&subject.canonical()));
                let d = run(&diag(&v), input.clone(), *fuel, &TowerOracle);
                let t = run(&subject, input, *fuel, &TowerOracle);
                out.line(format_args!("diag: {d}"));
                out.line(format_args!("subject: {t}"));
                let holds = d.halted() && d != t;
                out.code = if holds { 0 } else { 1 };
                out.line(if holds { "DIFFER" } else { "SAME" });
            }
            SelftestCommand::Fuzz { n, seed } => {
                let mut rng = StdRng::seed_from_u64(*seed);
                let mut accepted = 0;
                for _ in 0..*n {
                    let v = generate::desc(&mut rng, 1);
                    let cert = generate::certificate(&mut rng, 3);
                    let program = generate::subject(&mut rng);
                    if verify(&v, &cert, &program).is_accept() {
                        accepted += 1;
                    }
                }
                out.line(format_args!("TOTAL {n} ACCEPT {accepted} REJECT {}", n - accepted));
            }
        },
    }
    Ok(())
}

pub fn dispatch<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome {
                    code: 2,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                Outcome {
                    code: 0,
                    stdout: text,
                    stderr: String::new(),
                }
            };
        }
    };
    let mut out = Output::new();
    if let Err(Failure(message)) = execute(&cli.command, &mut out) {
        return Outcome {
            code: 2,
            stdout: String::new(),
            stderr: format!("error: {message}\n"),
        };
    }
    if let Some(path) = &cli.output {
        if let Err(e) = fs::write(path, &out.stdout) {
            return Outcome {
                code: 2,
                stdout: String::new(),
                stderr: format!("error: {}: {e}\n", path.display()),
            };
        }
        out.stdout.clear();
    }
    Outcome {
        code: out.code,
        stdout: out.stdout,
        stderr: out.stderr,
    }
}

pub fn main() -> i32 {
    let outcome = dispatch(std::env::args_os());
    print!("{}", outcome.stdout);
    eprint!("{}", outcome.stderr);
    outcome.code
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cli(args: &[&str]) -> Outcome {
        dispatch(std::iter::once("omega-tower").chain(args.iter().copied()))
    }

    #[test]
    fn ord_cmp() {
        let out = cli(&["ord", "cmp", "w + 1", "w*2"]);
        assert_eq!((out.code, out.stdout.as_str()), (0, "LESS\n"));
        assert_eq!(cli(&["ord", "cmp", "w^w", "w^w"]).stdout, "EQUAL\n");
        assert_eq!(cli(&["ord", "cmp", "w^2", "w*9"]).stdout, "GREATER\n");
        assert_eq!(cli(&["ord", "cmp", "w +", "1"]).code, 2);
    }

    #[test]
    fn run_inline() {
        let out = cli(&["run", "--program", "(fun (x) (block (return (bool true))))", "--input", "(nat 5)", "--fuel", "100"]);
        assert_eq!((out.code, out.stdout.as_str()), (0, "HALT (bool true)\n"));
    }

    #[test]
    fn both_sources_is_usage_error() {
        let out = cli(&["run", "--program", "(fun (x) (block (return (var x))))", "--program-file", "/nonexistent"]);
        assert_eq!(out.code, 2);
        assert!(out.stderr.contains("not both"));
    }

    #[test]
    fn unknown_subcommand() {
        assert_eq!(cli(&["frobnicate"]).code, 2);
        assert_eq!(cli(&[]).code, 2);
    }
}
