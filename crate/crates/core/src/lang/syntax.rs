use std::sync::Arc;

use super::{BinOp, Expr, Program, Stmt, UnOp, Value};
use crate::sexp::{self, arity, Datum, ParseError, Sexp};

pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    program_from_sexp(&sexp::read(text)?)
}

pub fn parse_value(text: &str) -> Result<Value, ParseError> {
    value_from_sexp(&sexp::read(text)?)
}

pub(crate) fn program_from_sexp(form: &Sexp) -> Result<Program, ParseError> {
    let (head, args) = form.expect_form()?;
    if head != "fun" {
        return Err(form.error(format!("expected `fun`, found `{head}`")));
    }
    let args = arity(form, head, args, 2)?;
    let params = args[0].expect_list()?;
    if params.len() != 1 {
        return Err(args[0].error("a program takes exactly one parameter"));
    }
    let param = params[0].expect_name()?.to_string();

    let (head, items) = args[1].expect_form()?;
    if head != "block" {
        return Err(args[1].error(format!("expected `block`, found `{head}`")));
    }
    let Some((last, stmts)) = items.split_last() else {
        return Err(args[1].error("block must end with `return`"));
    };
    let body = stmts.iter().map(stmt_from_sexp).collect::<Result<_, _>>()?;
    let ret = match last.expect_form()? {
        ("return", ret_args) => expr_from_sexp(&arity(last, "return", ret_args, 1)?[0])?,
        _ => return Err(last.error("block must end with `return`")),
    };
    Ok(Program { param, body, ret })
}

fn body_from_sexp(form: &Sexp) -> Result<Vec<Stmt>, ParseError> {
    match form.expect_form()? {
        ("body", stmts) => stmts.iter().map(stmt_from_sexp).collect(),
        (head, _) => Err(form.error(format!("expected `body`, found `{head}`"))),
    }
}

fn stmt_from_sexp(form: &Sexp) -> Result<Stmt, ParseError> {
    let (head, args) = form.expect_form()?;
    match head {
        "set" => {
            let args = arity(form, head, args, 2)?;
            Ok(Stmt::Set(args[0].expect_name()?.to_string(), expr_from_sexp(&args[1])?))
        }
        "while" => {
            let args = arity(form, head, args, 2)?;
            Ok(Stmt::While {
                guard: expr_from_sexp(&args[0])?,
                body: body_from_sexp(&args[1])?,
            })
        }
        "if" => {
            let args = arity(form, head, args, 3)?;
            Ok(Stmt::If {
                cond: expr_from_sexp(&args[0])?,
                then_body: body_from_sexp(&args[1])?,
                else_body: body_from_sexp(&args[2])?,
            })
        }
        "return" => Err(form.error("`return` is only allowed as the last element of the top-level block")),
        _ => Err(form.error(format!("unknown statement `{head}`"))),
    }
}

fn expr_from_sexp(form: &Sexp) -> Result<Expr, ParseError> {
    let (head, args) = form.expect_form()?;
    if let Some(op) = BinOp::ALL.into_iter().find(|op| op.keyword() == head) {
        let args = arity(form, head, args, 2)?;
        return Ok(Expr::binary(op, expr_from_sexp(&args[0])?, expr_from_sexp(&args[1])?));
    }
    if let Some(op) = UnOp::ALL.into_iter().find(|op| op.keyword() == head) {
        let args = arity(form, head, args, 1)?;
        return Ok(Expr::unary(op, expr_from_sexp(&args[0])?));
    }
    match head {
        "nat" => Ok(Expr::Nat(arity(form, head, args, 1)?[0].expect_nat()?)),
        "bool" => Ok(Expr::Bool(bool_from_sexp(&arity(form, head, args, 1)?[0])?)),
        "str" => Ok(Expr::Str(Arc::from(arity(form, head, args, 1)?[0].expect_str()?))),
        "var" => Ok(Expr::Var(arity(form, head, args, 1)?[0].expect_name()?.to_string())),
        "verify" => {
            let args = arity(form, head, args, 3)?;
            Ok(Expr::Verify {
                verifier: Box::new(expr_from_sexp(&args[0])?),
                proof: Box::new(expr_from_sexp(&args[1])?),
                program: Box::new(expr_from_sexp(&args[2])?),
            })
        }
        "apply" => {
            let args = arity(form, head, args, 2)?;
            Ok(Expr::Apply {
                program: Box::new(expr_from_sexp(&args[0])?),
                input: Box::new(expr_from_sexp(&args[1])?),
            })
        }
        _ => Err(form.error(format!("unknown expression `{head}`"))),
    }
}

fn bool_from_sexp(form: &Sexp) -> Result<bool, ParseError> {
    match &form.datum {
        Datum::Atom(a) if a == "true" => Ok(true),
        Datum::Atom(a) if a == "false" => Ok(false),
        _ => Err(form.error("expected `true` or `false`")),
    }
}

fn value_from_sexp(form: &Sexp) -> Result<Value, ParseError> {
    let (head, args) = form.expect_form()?;
    match head {
        "nat" => Ok(Value::Nat(arity(form, head, args, 1)?[0].expect_nat()?)),
        "bool" => Ok(Value::Bool(bool_from_sexp(&arity(form, head, args, 1)?[0])?)),
        "str" => Ok(Value::str(arity(form, head, args, 1)?[0].expect_str()?)),
        "pair" => {
            let args = arity(form, head, args, 2)?;
            Ok(Value::pair(value_from_sexp(&args[0])?, value_from_sexp(&args[1])?))
        }
        _ => Err(form.error(format!("unknown value form `{head}`"))),
    }
}
