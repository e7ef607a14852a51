use std::collections::{HashMap, HashSet};

use super::lexer::{tokenize, Token, TokenKind};
use super::{
    Argument, BinOp, BodyStmt, CircuitAst, Expr, GateDef, ParseError, Pos, RegDecl, Statement,
    UnOp,
};

/// The standard gate library, resolved in place of `include "qelib1.inc"`.
pub const QELIB1: &str = include_str!("qelib1.inc");

pub fn parse_qasm(source: &str) -> Result<CircuitAst, ParseError> {
    let tokens = tokenize(source)?;
    let mut parser = Parser::new(tokens);
    parser.parse_main()
}

struct Parser {
    tokens: Vec<Token>,
    index: usize,
    qregs: Vec<RegDecl>,
    cregs: Vec<RegDecl>,
    gate_defs: HashMap<String, GateDef>,
    qelib_gates: HashSet<String>,
    statements: Vec<Statement>,
}

impl Parser {
    fn new(tokens: Vec<Token>) -> Parser {
        Parser {
            tokens,
            index: 0,
            qregs: Vec::new(),
            cregs: Vec::new(),
            gate_defs: HashMap::new(),
            qelib_gates: HashSet::new(),
            statements: Vec::new(),
        }
    }

    fn peek(&self) -> Option<&TokenKind> {
        self.tokens.get(self.index).map(|t| &t.kind)
    }

    fn pos(&self) -> Pos {
        self.tokens
            .get(self.index)
            .or_else(|| self.tokens.last())
            .map(|t| t.pos)
            .unwrap_or_default()
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.index).cloned();
        if t.is_some() {
            self.index += 1;
        }
        t
    }

    fn syntax<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            pos: self.pos(),
            message: message.into(),
        })
    }

    fn semantic<T>(&self, pos: Pos, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Semantic {
            pos,
            message: message.into(),
        })
    }

    fn expect(&mut self, kind: &TokenKind, what: &str) -> Result<Pos, ParseError> {
        match self.next() {
            Some(t) if t.kind == *kind => Ok(t.pos),
            Some(t) => Err(ParseError::Syntax {
                pos: t.pos,
                message: format!("expected {what}, found {}", t.kind.describe()),
            }),
            None => Err(ParseError::Syntax {
                pos: self.pos(),
                message: format!("expected {what}, found end of input"),
            }),
        }
    }

    fn expect_ident(&mut self, what: &str) -> Result<(String, Pos), ParseError> {
        match self.next() {
            Some(Token {
                kind: TokenKind::Ident(name),
                pos,
            }) => Ok((name, pos)),
            Some(t) => Err(ParseError::Syntax {
                pos: t.pos,
                message: format!("expected {what}, found {}", t.kind.describe()),
            }),
            None => Err(ParseError::Syntax {
                pos: self.pos(),
                message: format!("expected {what}, found end of input"),
            }),
        }
    }

    fn expect_int(&mut self, what: &str) -> Result<(u64, Pos), ParseError> {
        match self.next() {
            Some(Token {
                kind: TokenKind::Int(v),
                pos,
            }) => Ok((v, pos)),
            Some(t) => Err(ParseError::Syntax {
                pos: t.pos,
                message: format!("expected {what}, found {}", t.kind.describe()),
            }),
            None => Err(ParseError::Syntax {
                pos: self.pos(),
                message: format!("expected {what}, found end of input"),
            }),
        }
    }

    fn parse_main(&mut self) -> Result<CircuitAst, ParseError> {
        // The OPENQASM 2.0 header line is mandatory.
        self.expect(&TokenKind::OpenQasm, "`OPENQASM`")?;
        match self.next() {
            Some(Token {
                kind: TokenKind::Real(v),
                ..
            }) if v == 2.0 => {}
            Some(t) => {
                return Err(ParseError::Syntax {
                    pos: t.pos,
                    message: "only OPENQASM 2.0 is supported".into(),
                })
            }
            None => return self.syntax("expected version number"),
        }
        self.expect(&TokenKind::Semicolon, "`;`")?;

        while let Some(kind) = self.peek() {
            match kind {
                TokenKind::Include => self.parse_include()?,
                TokenKind::Qreg => self.parse_reg(true)?,
                TokenKind::Creg => self.parse_reg(false)?,
                TokenKind::Gate => self.parse_gate_def()?,
                TokenKind::Opaque => self.parse_opaque()?,
                _ => {
                    let stmt = self.parse_statement()?;
                    self.statements.push(stmt);
                }
            }
        }
        Ok(CircuitAst {
            qregs: std::mem::take(&mut self.qregs),
            cregs: std::mem::take(&mut self.cregs),
            gate_defs: std::mem::take(&mut self.gate_defs),
            qelib_gates: std::mem::take(&mut self.qelib_gates),
            statements: std::mem::take(&mut self.statements),
        })
    }

    fn parse_include(&mut self) -> Result<(), ParseError> {
        self.expect(&TokenKind::Include, "`include`")?;
        let (name, pos) = match self.next() {
            Some(Token {
                kind: TokenKind::Str(s),
                pos,
            }) => (s, pos),
            _ => return self.syntax("expected a file name string"),
        };
        self.expect(&TokenKind::Semicolon, "`;`")?;
        if name != "qelib1.inc" {
            return self.semantic(pos, format!("cannot resolve include \"{name}\"; only the built-in qelib1.inc is available"));
        }
        // Parse the library with a sub-parser so its definitions can be
        // tagged as library gates.
        let mut lib = Parser::new(tokenize(QELIB1)?);
        while let Some(kind) = lib.peek() {
            match kind {
                TokenKind::Gate => lib.parse_gate_def()?,
                other => {
                    return Err(ParseError::Syntax {
                        pos: lib.pos(),
                        message: format!("unexpected {} in qelib1.inc", other.describe()),
                    })
                }
            }
        }
        for (gname, def) in lib.gate_defs {
            if self.gate_defs.contains_key(&gname) {
                return self.semantic(pos, format!("gate `{gname}` already defined"));
            }
            self.qelib_gates.insert(gname.clone());
            self.gate_defs.insert(gname, def);
        }
        Ok(())
    }

    fn parse_reg(&mut self, quantum: bool) -> Result<(), ParseError> {
        self.next(); // qreg / creg
        let (name, pos) = self.expect_ident("register name")?;
        self.expect(&TokenKind::LBracket, "`[`")?;
        let (size, _) = self.expect_int("register size")?;
        self.expect(&TokenKind::RBracket, "`]`")?;
        self.expect(&TokenKind::Semicolon, "`;`")?;
        if size == 0 {
            return self.semantic(pos, format!("register `{name}` must have positive size"));
        }
        if self.qregs.iter().any(|r| r.name == name) || self.cregs.iter().any(|r| r.name == name) {
            return self.semantic(pos, format!("register `{name}` already declared"));
        }
        let regs = if quantum {
            &mut self.qregs
        } else {
            &mut self.cregs
        };
        let offset = regs.iter().map(|r| r.size).sum();
        regs.push(RegDecl {
            name,
            size: size as u32,
            offset,
            pos,
        });
        Ok(())
    }

    fn parse_opaque(&mut self) -> Result<(), ParseError> {
        self.next(); // opaque
        let (name, pos) = self.expect_ident("gate name")?;
        let params = if self.peek() == Some(&TokenKind::LParen) {
            self.next();
            self.parse_ident_list(&TokenKind::RParen)?
        } else {
            Vec::new()
        };
        let qargs = self.parse_ident_list(&TokenKind::Semicolon)?;
        if qargs.is_empty() {
            return self.semantic(pos, "opaque declaration needs at least one qubit argument");
        }
        if self.gate_defs.contains_key(&name) {
            return self.semantic(pos, format!("gate `{name}` already defined"));
        }
        self.gate_defs.insert(
            name.clone(),
            GateDef {
                name,
                params,
                qargs,
                body: None,
                pos,
            },
        );
        Ok(())
    }

    /// Comma-separated identifiers terminated by `end` (consumed).
    fn parse_ident_list(&mut self, end: &TokenKind) -> Result<Vec<String>, ParseError> {
        let mut out = Vec::new();
        if self.peek() == Some(end) {
            self.next();
            return Ok(out);
        }
        loop {
            let (name, _) = self.expect_ident("identifier")?;
            out.push(name);
            match self.next() {
                Some(t) if t.kind == *end => break,
                Some(Token {
                    kind: TokenKind::Comma,
                    ..
                }) => continue,
                _ => return self.syntax(format!("expected `,` or {}", end.describe())),
            }
        }
        Ok(out)
    }

    fn parse_gate_def(&mut self) -> Result<(), ParseError> {
        self.next(); // gate
        let (name, pos) = self.expect_ident("gate name")?;
        let params = if self.peek() == Some(&TokenKind::LParen) {
            self.next();
            self.parse_ident_list(&TokenKind::RParen)?
        } else {
            Vec::new()
        };
        let qargs = self.parse_ident_list(&TokenKind::LBrace)?;
        if qargs.is_empty() {
            return self.semantic(pos, "gate definition needs at least one qubit argument");
        }
        let formal_qubits: HashSet<&String> = qargs.iter().collect();
        if formal_qubits.len() != qargs.len() {
            return self.semantic(pos, "duplicate qubit argument name");
        }
        if self.gate_defs.contains_key(&name) {
            return self.semantic(pos, format!("gate `{name}` already defined"));
        }
        let mut body = Vec::new();
        loop {
            match self.peek() {
                Some(TokenKind::RBrace) => {
                    self.next();
                    break;
                }
                Some(TokenKind::Barrier) => {
                    let bpos = self.pos();
                    self.next();
                    let args = self.parse_ident_list(&TokenKind::Semicolon)?;
                    for a in &args {
                        if !formal_qubits.contains(a) {
                            return self.semantic(bpos, format!("`{a}` is not a qubit argument of `{name}`"));
                        }
                    }
                    body.push(BodyStmt::Barrier { qargs: args, pos: bpos });
                }
                Some(_) => {
                    let call = self.parse_body_call(&name, &params, &formal_qubits)?;
                    body.push(call);
                }
                None => return self.syntax("unterminated gate body"),
            }
        }
        self.gate_defs.insert(
            name.clone(),
            GateDef {
                name,
                params,
                qargs,
                body: Some(body),
                pos,
            },
        );
        Ok(())
    }

    fn parse_body_call(
        &mut self,
        enclosing: &str,
        formal_params: &[String],
        formal_qubits: &HashSet<&String>,
    ) -> Result<BodyStmt, ParseError> {
        let (callee, pos) = match self.next() {
            Some(Token {
                kind: TokenKind::U,
                pos,
            }) => ("U".to_string(), pos),
            Some(Token {
                kind: TokenKind::Cx,
                pos,
            }) => ("CX".to_string(), pos),
            Some(Token {
                kind: TokenKind::Ident(n),
                pos,
            }) => (n, pos),
            Some(t) => {
                return Err(ParseError::Syntax {
                    pos: t.pos,
                    message: format!("expected a gate call, found {}", t.kind.describe()),
                })
            }
            None => return self.syntax("expected a gate call"),
        };
        let params = if self.peek() == Some(&TokenKind::LParen) {
            self.next();
            self.parse_expr_list()?
        } else {
            Vec::new()
        };
        let qargs = self.parse_ident_list(&TokenKind::Semicolon)?;
        for a in &qargs {
            if !formal_qubits.contains(a) {
                return self.semantic(pos, format!("`{a}` is not a qubit argument of `{enclosing}`"));
            }
        }
        // Expressions may only reference the enclosing formal parameters.
        for e in &params {
            check_expr_params(e, formal_params).map_err(|p| ParseError::Semantic {
                pos,
                message: format!("unknown parameter `{p}` in gate body"),
            })?;
        }
        self.check_call_signature(&callee, params.len(), qargs.len(), pos)?;
        let unique: HashSet<&String> = qargs.iter().collect();
        if unique.len() != qargs.len() {
            return self.semantic(pos, "gate arguments must be distinct qubits");
        }
        Ok(BodyStmt::Call {
            name: callee,
            params,
            qargs,
            pos,
        })
    }

    fn check_call_signature(
        &self,
        callee: &str,
        n_params: usize,
        n_qargs: usize,
        pos: Pos,
    ) -> Result<(), ParseError> {
        let (want_params, want_qargs) = match callee {
            "U" => (3, 1),
            "CX" => (0, 2),
            _ => match self.gate_defs.get(callee) {
                Some(def) => (def.params.len(), def.qargs.len()),
                None => {
                    return self.semantic(pos, format!("unknown gate `{callee}`"));
                }
            },
        };
        if n_params != want_params {
            return self.semantic(
                pos,
                format!("gate `{callee}` takes {want_params} parameter(s), got {n_params}"),
            );
        }
        if n_qargs != want_qargs {
            return self.semantic(
                pos,
                format!("gate `{callee}` takes {want_qargs} qubit argument(s), got {n_qargs}"),
            );
        }
        Ok(())
    }

    fn parse_statement(&mut self) -> Result<Statement, ParseError> {
        match self.peek() {
            Some(TokenKind::Measure) => {
                let pos = self.pos();
                self.next();
                let qarg = self.parse_argument()?;
                self.expect(&TokenKind::Arrow, "`->`")?;
                let carg = self.parse_argument()?;
                self.expect(&TokenKind::Semicolon, "`;`")?;
                self.check_measure(&qarg, &carg, pos)?;
                Ok(Statement::Measure { qarg, carg, pos })
            }
            Some(TokenKind::Reset) => {
                let pos = self.pos();
                self.next();
                let arg = self.parse_argument()?;
                self.expect(&TokenKind::Semicolon, "`;`")?;
                self.check_quantum_argument(&arg, pos)?;
                Ok(Statement::Reset { arg, pos })
            }
            Some(TokenKind::Barrier) => {
                let pos = self.pos();
                self.next();
                let args = self.parse_argument_list()?;
                for a in &args {
                    self.check_quantum_argument(a, pos)?;
                }
                Ok(Statement::Barrier { args, pos })
            }
            Some(TokenKind::If) => {
                let pos = self.pos();
                self.next();
                self.expect(&TokenKind::LParen, "`(`")?;
                let (creg, cpos) = self.expect_ident("classical register")?;
                if self.cregs.iter().all(|r| r.name != creg) {
                    return self.semantic(cpos, format!("undeclared classical register `{creg}`"));
                }
                self.expect(&TokenKind::EqEq, "`==`")?;
                let (value, _) = self.expect_int("comparison value")?;
                self.expect(&TokenKind::RParen, "`)`")?;
                let body = self.parse_statement()?;
                if matches!(body, Statement::If { .. }) {
                    return self.semantic(pos, "nested `if` is not allowed");
                }
                Ok(Statement::If {
                    creg,
                    value,
                    body: Box::new(body),
                    pos,
                })
            }
            _ => self.parse_gate_statement(),
        }
    }

    fn parse_gate_statement(&mut self) -> Result<Statement, ParseError> {
        let (name, pos) = match self.next() {
            Some(Token {
                kind: TokenKind::U,
                pos,
            }) => ("U".to_string(), pos),
            Some(Token {
                kind: TokenKind::Cx,
                pos,
            }) => ("CX".to_string(), pos),
            Some(Token {
                kind: TokenKind::Ident(n),
                pos,
            }) => (n, pos),
            Some(t) => {
                return Err(ParseError::Syntax {
                    pos: t.pos,
                    message: format!("expected a statement, found {}", t.kind.describe()),
                })
            }
            None => return self.syntax("expected a statement"),
        };
        let params = if self.peek() == Some(&TokenKind::LParen) {
            self.next();
            self.parse_expr_list()?
        } else {
            Vec::new()
        };
        let args = self.parse_argument_list()?;
        self.check_call_signature(&name, params.len(), args.len(), pos)?;
        for e in &params {
            check_expr_params(e, &[]).map_err(|p| ParseError::Semantic {
                pos,
                message: format!("unknown identifier `{p}` in parameter expression"),
            })?;
        }
        for a in &args {
            self.check_quantum_argument(a, pos)?;
        }
        self.check_broadcast(&args, pos)?;
        Ok(Statement::Gate {
            name,
            params,
            args,
            pos,
        })
    }

    fn parse_argument(&mut self) -> Result<Argument, ParseError> {
        let (name, _) = self.expect_ident("register name")?;
        if self.peek() == Some(&TokenKind::LBracket) {
            self.next();
            let (idx, _) = self.expect_int("index")?;
            self.expect(&TokenKind::RBracket, "`]`")?;
            Ok(Argument::Indexed(name, idx as u32))
        } else {
            Ok(Argument::Reg(name))
        }
    }

    /// Comma-separated arguments terminated by `;` (consumed).
    fn parse_argument_list(&mut self) -> Result<Vec<Argument>, ParseError> {
        let mut out = Vec::new();
        loop {
            out.push(self.parse_argument()?);
            match self.next() {
                Some(Token {
                    kind: TokenKind::Semicolon,
                    ..
                }) => break,
                Some(Token {
                    kind: TokenKind::Comma,
                    ..
                }) => continue,
                _ => return self.syntax("expected `,` or `;`"),
            }
        }
        Ok(out)
    }

    /// Comma-separated expressions terminated by `)` (consumed).
    fn parse_expr_list(&mut self) -> Result<Vec<Expr>, ParseError> {
        let mut out = Vec::new();
        if self.peek() == Some(&TokenKind::RParen) {
            self.next();
            return Ok(out);
        }
        loop {
            out.push(self.parse_expr()?);
            match self.next() {
                Some(Token {
                    kind: TokenKind::RParen,
                    ..
                }) => break,
                Some(Token {
                    kind: TokenKind::Comma,
                    ..
                }) => continue,
                _ => return self.syntax("expected `,` or `)`"),
            }
        }
        Ok(out)
    }

    // Precedence climbing: + - < * / < unary - < ^ (right-assoc).
    fn parse_expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.parse_term()?;
        loop {
            let op = match self.peek() {
                Some(TokenKind::Plus) => BinOp::Add,
                Some(TokenKind::Minus) => BinOp::Sub,
                _ => break,
            };
            self.next();
            let rhs = self.parse_term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn parse_term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.parse_unary()?;
        loop {
            let op = match self.peek() {
                Some(TokenKind::Star) => BinOp::Mul,
                Some(TokenKind::Slash) => BinOp::Div,
                _ => break,
            };
            self.next();
            let rhs = self.parse_unary()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn parse_unary(&mut self) -> Result<Expr, ParseError> {
        if self.peek() == Some(&TokenKind::Minus) {
            self.next();
            let e = self.parse_unary()?;
            return Ok(Expr::Unary(UnOp::Neg, Box::new(e)));
        }
        self.parse_power()
    }

    fn parse_power(&mut self) -> Result<Expr, ParseError> {
        let base = self.parse_atom()?;
        if self.peek() == Some(&TokenKind::Caret) {
            self.next();
            // Right-associative; unary minus binds tighter than `^` here.
            let exp = self.parse_unary()?;
            return Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn parse_atom(&mut self) -> Result<Expr, ParseError> {
        match self.next() {
            Some(Token {
                kind: TokenKind::Int(v),
                ..
            }) => Ok(Expr::Number(v as f64)),
            Some(Token {
                kind: TokenKind::Real(v),
                ..
            }) => Ok(Expr::Number(v)),
            Some(Token {
                kind: TokenKind::Pi,
                ..
            }) => Ok(Expr::Pi),
            Some(Token {
                kind: TokenKind::LParen,
                ..
            }) => {
                let e = self.parse_expr()?;
                self.expect(&TokenKind::RParen, "`)`")?;
                Ok(e)
            }
            Some(Token {
                kind: TokenKind::Ident(name),
                pos,
            }) => {
                let func = match name.as_str() {
                    "sin" => Some(UnOp::Sin),
                    "cos" => Some(UnOp::Cos),
                    "tan" => Some(UnOp::Tan),
                    "exp" => Some(UnOp::Exp),
                    "ln" => Some(UnOp::Ln),
                    "sqrt" => Some(UnOp::Sqrt),
                    _ => None,
                };
                match func {
                    Some(op) => {
                        self.expect(&TokenKind::LParen, "`(`")?;
                        let e = self.parse_expr()?;
                        self.expect(&TokenKind::RParen, "`)`")?;
                        Ok(Expr::Unary(op, Box::new(e)))
                    }
                    None => {
                        let _ = pos;
                        Ok(Expr::Param(name))
                    }
                }
            }
            Some(t) => Err(ParseError::Syntax {
                pos: t.pos,
                message: format!("expected an expression, found {}", t.kind.describe()),
            }),
            None => self.syntax("expected an expression"),
        }
    }

    fn check_quantum_argument(&self, arg: &Argument, pos: Pos) -> Result<(), ParseError> {
        let reg = match self.qregs.iter().find(|r| r.name == arg.reg_name()) {
            Some(r) => r,
            None => {
                return self.semantic(
                    pos,
                    format!("undeclared quantum register `{}`", arg.reg_name()),
                )
            }
        };
        if let Argument::Indexed(_, idx) = arg {
            if *idx >= reg.size {
                return self.semantic(
                    pos,
                    format!(
                        "index {idx} out of range for register `{}[{}]`",
                        reg.name, reg.size
                    ),
                );
            }
        }
        Ok(())
    }

    fn check_measure(&self, qarg: &Argument, carg: &Argument, pos: Pos) -> Result<(), ParseError> {
        self.check_quantum_argument(qarg, pos)?;
        let creg = match self.cregs.iter().find(|r| r.name == carg.reg_name()) {
            Some(r) => r,
            None => {
                return self.semantic(
                    pos,
                    format!("undeclared classical register `{}`", carg.reg_name()),
                )
            }
        };
        match (qarg, carg) {
            (Argument::Indexed(..), Argument::Indexed(_, idx)) => {
                if *idx >= creg.size {
                    return self.semantic(
                        pos,
                        format!(
                            "index {idx} out of range for register `{}[{}]`",
                            creg.name, creg.size
                        ),
                    );
                }
            }
            (Argument::Reg(qname), Argument::Reg(_)) => {
                let qsize = self.qregs.iter().find(|r| &r.name == qname).unwrap().size;
                if qsize != creg.size {
                    return self.semantic(
                        pos,
                        format!(
                            "measure register sizes differ: {qsize} vs {}",
                            creg.size
                        ),
                    );
                }
            }
            _ => {
                return self.semantic(
                    pos,
                    "measure arguments must both be registers or both be elements",
                )
            }
        }
        Ok(())
    }

    /// All whole-register args in a broadcast must have the same size, and no
    /// qubit may appear twice in one statement.
    fn check_broadcast(&self, args: &[Argument], pos: Pos) -> Result<(), ParseError> {
        let mut sizes = Vec::new();
        for a in args {
            if let Argument::Reg(name) = a {
                let reg = self.qregs.iter().find(|r| &r.name == name).unwrap();
                sizes.push(reg.size);
            }
        }
        if sizes.windows(2).any(|w| w[0] != w[1]) {
            return self.semantic(pos, "broadcast registers must have equal sizes");
        }
        // Textually identical arguments are rejected here; partial overlaps
        // (the same qubit reached through different spellings) surface at
        // lowering when arguments are flattened.
        let mut seen = HashSet::new();
        for a in args {
            let key = (
                a.reg_name().to_string(),
                match a {
                    Argument::Indexed(_, i) => Some(*i),
                    Argument::Reg(_) => None,
                },
            );
            if !seen.insert(key) {
                return self.semantic(pos, "gate arguments must be distinct");
            }
        }
        Ok(())
    }
}

fn check_expr_params(expr: &Expr, allowed: &[String]) -> Result<(), String> {
    match expr {
        Expr::Number(_) | Expr::Pi => Ok(()),
        Expr::Param(name) => {
            if allowed.iter().any(|p| p == name) {
                Ok(())
            } else {
                Err(name.clone())
            }
        }
        Expr::Unary(_, e) => check_expr_params(e, allowed),
        Expr::Binary(_, a, b) => {
            check_expr_params(a, allowed)?;
            check_expr_params(b, allowed)
        }
    }
}
