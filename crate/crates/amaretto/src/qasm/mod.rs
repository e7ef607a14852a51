//! OpenQASM 2.0 front end: lexer, parser and the validated circuit AST.
//!
//! `include "qelib1.inc"` resolves to a built-in copy of the standard gate
//! library; no filesystem access happens during parsing.

mod lexer;
mod parser;

pub use parser::parse_qasm;

use std::collections::HashMap;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl std::fmt::Display for Pos {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {}, column {}", self.line, self.col)
    }
}

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("lexical error at {pos}: {message}")]
    Lexical { pos: Pos, message: String },
    #[error("syntax error at {pos}: {message}")]
    Syntax { pos: Pos, message: String },
    #[error("semantic error at {pos}: {message}")]
    Semantic { pos: Pos, message: String },
}

impl ParseError {
    pub fn pos(&self) -> Pos {
        match self {
            ParseError::Lexical { pos, .. }
            | ParseError::Syntax { pos, .. }
            | ParseError::Semantic { pos, .. } => *pos,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnOp {
    Neg,
    Sin,
    Cos,
    Tan,
    Exp,
    Ln,
    Sqrt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

/// A parameter expression. Evaluation happens at lowering time, with the
/// enclosing gate's formal parameters bound in `env`.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Number(f64),
    Pi,
    Param(String),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn eval(&self, env: &HashMap<String, f64>) -> Result<f64, String> {
        Ok(match self {
            Expr::Number(x) => *x,
            Expr::Pi => std::f64::consts::PI,
            Expr::Param(name) => *env
                .get(name)
                .ok_or_else(|| format!("unbound parameter `{name}`"))?,
            Expr::Unary(op, e) => {
                let v = e.eval(env)?;
                match op {
                    UnOp::Neg => -v,
                    UnOp::Sin => v.sin(),
                    UnOp::Cos => v.cos(),
                    UnOp::Tan => v.tan(),
                    UnOp::Exp => v.exp(),
                    UnOp::Ln => v.ln(),
                    UnOp::Sqrt => v.sqrt(),
                }
            }
            Expr::Binary(op, a, b) => {
                let (a, b) = (a.eval(env)?, b.eval(env)?);
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == 0.0 {
                            return Err("division by zero in parameter expression".into());
                        }
                        a / b
                    }
                    BinOp::Pow => a.powf(b),
                }
            }
        })
    }
}

/// A quantum or classical register argument: a whole register (broadcast) or
/// one element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Argument {
    Reg(String),
    Indexed(String, u32),
}

impl Argument {
    pub fn reg_name(&self) -> &str {
        match self {
            Argument::Reg(n) | Argument::Indexed(n, _) => n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegDecl {
    pub name: String,
    pub size: u32,
    /// Flattened offset of element 0 in declaration order.
    pub offset: u32,
    pub pos: Pos,
}

/// A call inside a gate body: arguments are the enclosing definition's formal
/// qubit names (OpenQASM 2 forbids indexing there).
#[derive(Debug, Clone, PartialEq)]
pub enum BodyStmt {
    Call {
        name: String,
        params: Vec<Expr>,
        qargs: Vec<String>,
        pos: Pos,
    },
    Barrier {
        qargs: Vec<String>,
        pos: Pos,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateDef {
    pub name: String,
    pub params: Vec<String>,
    pub qargs: Vec<String>,
    /// `None` for opaque declarations.
    pub body: Option<Vec<BodyStmt>>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Statement {
    Gate {
        name: String,
        params: Vec<Expr>,
        args: Vec<Argument>,
        pos: Pos,
    },
    Barrier {
        args: Vec<Argument>,
        pos: Pos,
    },
    Measure {
        qarg: Argument,
        carg: Argument,
        pos: Pos,
    },
    Reset {
        arg: Argument,
        pos: Pos,
    },
    If {
        creg: String,
        value: u64,
        body: Box<Statement>,
        pos: Pos,
    },
}

impl Statement {
    pub fn pos(&self) -> Pos {
        match self {
            Statement::Gate { pos, .. }
            | Statement::Barrier { pos, .. }
            | Statement::Measure { pos, .. }
            | Statement::Reset { pos, .. }
            | Statement::If { pos, .. } => *pos,
        }
    }
}

/// Parsed and semantically validated circuit.
#[derive(Debug, Clone)]
pub struct CircuitAst {
    pub qregs: Vec<RegDecl>,
    pub cregs: Vec<RegDecl>,
    pub gate_defs: HashMap<String, GateDef>,
    /// Names that came from the built-in qelib1 include, as opposed to user
    /// definitions. Only these are eligible for native instruction mapping.
    pub qelib_gates: std::collections::HashSet<String>,
    pub statements: Vec<Statement>,
}

impl CircuitAst {
    pub fn total_qubits(&self) -> u32 {
        self.qregs.iter().map(|r| r.size).sum()
    }

    pub fn qreg(&self, name: &str) -> Option<&RegDecl> {
        self.qregs.iter().find(|r| r.name == name)
    }

    pub fn creg(&self, name: &str) -> Option<&RegDecl> {
        self.cregs.iter().find(|r| r.name == name)
    }

    /// Flattened qubit index of one register element.
    pub fn qubit_index(&self, reg: &str, element: u32) -> Option<u32> {
        self.qreg(reg).map(|r| r.offset + element)
    }
}
