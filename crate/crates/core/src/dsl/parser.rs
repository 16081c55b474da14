//! LL(1) recursive-descent parser. Errors are collected per line; after an
//! error the rest of the line is skipped and parsing resumes.

use super::ast::*;
use super::diagnostics::ParseDiagnostic;
use super::lexer::{tokenize, Token, TokenKind};
use crate::rational::parse_rational;
use crate::scm::VarKind;

/// Marker for an error that has already been reported.
struct Reported;

type PResult<T> = Result<T, Reported>;

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    diags: Vec<ParseDiagnostic>,
    doc: ModelDocument,
    seen_sections: Vec<Section>,
}

/// Parses the syntax of a document. Semantic checks live in [`super::validate`].
pub fn parse_syntax(text: &str) -> (ModelDocument, Vec<ParseDiagnostic>) {
    let (tokens, lex_diags) = tokenize(text);
    let mut p = Parser {
        tokens,
        pos: 0,
        diags: lex_diags,
        doc: ModelDocument::default(),
        seen_sections: Vec::new(),
    };
    p.document();
    (p.doc, p.diags)
}

/// Parses one query line such as `hkw direct I = 1 given B = 1`.
pub fn parse_query(text: &str) -> Result<Spanned<Query>, Vec<ParseDiagnostic>> {
    let (tokens, lex_diags) = tokenize(text);
    let mut p = Parser {
        tokens,
        pos: 0,
        diags: lex_diags,
        doc: ModelDocument::default(),
        seen_sections: Vec::new(),
    };
    let span = p.peek().span;
    let result = p.query().and_then(|q| {
        p.end_of_line()?;
        p.expect_eof()?;
        Ok(q)
    });
    match result {
        Ok(q) if p.diags.is_empty() => Ok(Spanned::new(q, span)),
        _ => Err(p.diags),
    }
}

/// Parses one reference line such as `B = 0, 1`.
pub fn parse_reference(text: &str) -> Result<ReferenceDecl, Vec<ParseDiagnostic>> {
    let (tokens, lex_diags) = tokenize(text);
    let mut p = Parser {
        tokens,
        pos: 0,
        diags: lex_diags,
        doc: ModelDocument::default(),
        seen_sections: Vec::new(),
    };
    let result = p.reference_line().and_then(|r| {
        p.expect_eof()?;
        Ok(r)
    });
    match result {
        Ok(r) if p.diags.is_empty() => Ok(r),
        _ => Err(p.diags),
    }
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn bump(&mut self) -> Token {
        let tok = self.tokens[self.pos].clone();
        if !matches!(tok.kind, TokenKind::Eof) {
            self.pos += 1;
        }
        tok
    }

    fn at_ident(&self, word: &str) -> bool {
        matches!(&self.peek().kind, TokenKind::Ident(w) if w == word)
    }

    fn error_here(&mut self, message: String) -> Reported {
        let tok = self.peek().clone();
        let token = match tok.kind {
            TokenKind::Newline | TokenKind::Eof => None,
            ref k => Some(k.text()),
        };
        self.diags
            .push(ParseDiagnostic::error(tok.span, message, token));
        Reported
    }

    fn unexpected(&mut self, wanted: &str) -> Reported {
        let found = self.peek().kind.describe();
        self.error_here(format!("expected {wanted}, found {found}"))
    }

    fn expect(&mut self, kind: TokenKind, wanted: &str) -> PResult<Token> {
        if self.peek().kind == kind {
            Ok(self.bump())
        } else {
            Err(self.unexpected(wanted))
        }
    }

    fn expect_keyword(&mut self, word: &str) -> PResult<Token> {
        if self.at_ident(word) {
            Ok(self.bump())
        } else {
            Err(self.unexpected(&format!("`{word}`")))
        }
    }

    fn end_of_line(&mut self) -> PResult<()> {
        match self.peek().kind {
            TokenKind::Newline => {
                self.bump();
                Ok(())
            }
            TokenKind::Eof => Ok(()),
            _ => Err(self.unexpected("end of line")),
        }
    }

    fn expect_eof(&mut self) -> PResult<()> {
        if matches!(self.peek().kind, TokenKind::Eof) {
            Ok(())
        } else {
            Err(self.unexpected("end of input"))
        }
    }

    fn skip_line(&mut self) {
        loop {
            match self.peek().kind {
                TokenKind::Eof | TokenKind::Header(_) => return,
                TokenKind::Newline => {
                    self.bump();
                    return;
                }
                _ => {
                    self.bump();
                }
            }
        }
    }

    fn document(&mut self) {
        let mut section: Option<Section> = None;
        let mut complained = false;
        loop {
            let tok = self.peek().clone();
            match &tok.kind {
                TokenKind::Eof => break,
                TokenKind::Newline => {
                    self.bump();
                }
                TokenKind::Header(name) => {
                    self.bump();
                    complained = false;
                    section = Section::from_name(name);
                    match section {
                        None => {
                            self.diags.push(ParseDiagnostic::error(
                                tok.span,
                                format!("unknown section `[{name}]`"),
                                Some(format!("[{name}]")),
                            ));
                            complained = true;
                        }
                        Some(s) if self.seen_sections.contains(&s) => {
                            self.diags.push(ParseDiagnostic::error(
                                tok.span,
                                format!("section `[{name}]` appears more than once"),
                                Some(format!("[{name}]")),
                            ));
                        }
                        Some(s) => self.seen_sections.push(s),
                    }
                    if self.end_of_line().is_err() {
                        self.skip_line();
                    }
                }
                _ => {
                    let result = match section {
                        Some(s) => self.section_line(s),
                        None => {
                            if !complained {
                                self.error_here(
                                    "expected a section header such as `[variables]`".into(),
                                );
                                complained = true;
                            }
                            Err(Reported)
                        }
                    };
                    if result.is_err() {
                        self.skip_line();
                    }
                }
            }
        }
    }

    fn section_line(&mut self, section: Section) -> PResult<()> {
        match section {
            Section::Variables => {
                let decl = self.variable_line()?;
                self.doc.variables.push(decl);
            }
            Section::Equations => match self.equation() {
                Ok(decl) => self.doc.equations.push(decl),
                Err(_) => {
                    // Drop the rest of a broken case block as well.
                    self.skip_line();
                    while self.at_ident("when") || self.at_ident("else") {
                        self.skip_line();
                    }
                }
            },
            Section::Distribution => {
                let decl = self.distribution_line()?;
                self.doc.distribution.push(decl);
            }
            Section::Utility => self.utility_line()?,
            Section::Reference => {
                let decl = self.reference_line()?;
                self.doc.reference.push(decl);
            }
            Section::Queries => {
                let span = self.peek().span;
                let q = self.query()?;
                self.end_of_line()?;
                self.doc.queries.push(Spanned::new(q, span));
            }
        }
        Ok(())
    }

    fn name(&mut self, what: &str) -> PResult<Name> {
        let tok = self.peek().clone();
        match &tok.kind {
            TokenKind::Ident(w) if is_keyword(w) => {
                Err(self.error_here(format!("`{w}` is a reserved word and cannot name a {what}")))
            }
            TokenKind::Ident(w) => {
                self.bump();
                Ok(Spanned::new(w.clone(), tok.span))
            }
            _ => Err(self.unexpected(&format!("a {what} name"))),
        }
    }

    /// A value label: an identifier or an integer.
    fn label(&mut self) -> PResult<Name> {
        let tok = self.peek().clone();
        match &tok.kind {
            TokenKind::Ident(w) if is_keyword(w) => {
                Err(self.error_here(format!("`{w}` is a reserved word and cannot be a value")))
            }
            TokenKind::Ident(w) => {
                self.bump();
                Ok(Spanned::new(w.clone(), tok.span))
            }
            TokenKind::Number(n) if is_integer(n) => {
                self.bump();
                Ok(Spanned::new(n.clone(), tok.span))
            }
            TokenKind::Number(n) => {
                Err(self.error_here(format!("value `{n}` must be an identifier or an integer")))
            }
            _ => Err(self.unexpected("a value")),
        }
    }

    fn rational(&mut self) -> PResult<Spanned<crate::rational::Rational>> {
        let tok = self.peek().clone();
        match &tok.kind {
            TokenKind::Number(n) => match parse_rational(n) {
                Ok(r) => {
                    self.bump();
                    Ok(Spanned::new(r, tok.span))
                }
                Err(e) => Err(self.error_here(e.to_string())),
            },
            _ => Err(self.unexpected("a number")),
        }
    }

    fn variable_line(&mut self) -> PResult<VariableDecl> {
        let kind = match &self.peek().kind {
            TokenKind::Ident(w) if w == "exogenous" => VarKind::Exogenous,
            TokenKind::Ident(w) if w == "endogenous" => VarKind::Endogenous,
            TokenKind::Ident(w) if w == "decision" => VarKind::Decision,
            _ => return Err(self.unexpected("`exogenous`, `endogenous` or `decision`")),
        };
        self.bump();
        let name = self.name("variable")?;
        self.expect(TokenKind::Colon, "`:` before the list of values")?;
        let mut domain = vec![self.label()?];
        while self.peek().kind == TokenKind::Comma {
            self.bump();
            domain.push(self.label()?);
        }
        self.end_of_line()?;
        Ok(VariableDecl { kind, name, domain })
    }

    fn equation(&mut self) -> PResult<EquationDecl> {
        let target = self.name("variable")?;
        self.expect(TokenKind::Assign, "`=`")?;
        if !self.at_ident("case") {
            let expr = self.expr()?;
            self.end_of_line()?;
            return Ok(EquationDecl {
                target,
                body: EquationBody::Expr(expr),
            });
        }
        self.bump();
        self.expect(TokenKind::Newline, "end of line after `case`")?;
        let mut arms = Vec::new();
        loop {
            if self.at_ident("when") {
                self.bump();
                let when = self.expr()?;
                self.expect(TokenKind::Arrow, "`->`")?;
                let value = self.label()?;
                self.end_of_line()?;
                arms.push(CaseArm { when, value });
            } else if self.at_ident("else") {
                self.bump();
                self.expect(TokenKind::Arrow, "`->`")?;
                let otherwise = self.label()?;
                self.end_of_line()?;
                return Ok(EquationDecl {
                    target,
                    body: EquationBody::Case { arms, otherwise },
                });
            } else {
                return Err(self.unexpected("`when` or `else` in a case block"));
            }
        }
    }

    fn expr(&mut self) -> PResult<Expr> {
        let first = self.conjunction()?;
        if self.peek().kind != TokenKind::Or {
            return Ok(first);
        }
        let mut items = vec![first];
        while self.peek().kind == TokenKind::Or {
            self.bump();
            items.push(self.conjunction()?);
        }
        Ok(Expr::Or(items))
    }

    fn conjunction(&mut self) -> PResult<Expr> {
        let first = self.unary()?;
        if self.peek().kind != TokenKind::And {
            return Ok(first);
        }
        let mut items = vec![first];
        while self.peek().kind == TokenKind::And {
            self.bump();
            items.push(self.unary()?);
        }
        Ok(Expr::And(items))
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.peek().kind == TokenKind::Bang {
            self.bump();
            return Ok(Expr::Not(Box::new(self.unary()?)));
        }
        self.primary()
    }

    fn primary(&mut self) -> PResult<Expr> {
        let tok = self.peek().clone();
        match &tok.kind {
            TokenKind::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.expect(TokenKind::RParen, "`)`")?;
                Ok(inner)
            }
            TokenKind::Ident(w) if w == "true" || w == "false" => {
                self.bump();
                Ok(Expr::Const(w == "true"))
            }
            TokenKind::Ident(_) => {
                let name = self.name("variable")?;
                match self.peek().kind {
                    TokenKind::EqEq => {
                        self.bump();
                        Ok(Expr::Is(name, self.label()?))
                    }
                    TokenKind::NotEq => {
                        self.bump();
                        Ok(Expr::IsNot(name, self.label()?))
                    }
                    _ => Ok(Expr::Var(name)),
                }
            }
            _ => Err(self.unexpected("an expression")),
        }
    }

    fn distribution_line(&mut self) -> PResult<DistributionDecl> {
        let name = self.name("variable")?;
        self.expect(TokenKind::Assign, "`=`")?;
        let prior = if self.peek().kind == TokenKind::LBracket {
            self.bump();
            let mut weights = vec![self.rational()?];
            while self.peek().kind == TokenKind::Comma {
                self.bump();
                weights.push(self.rational()?);
            }
            self.expect(TokenKind::RBracket, "`]`")?;
            Prior::Table(weights)
        } else {
            Prior::Bernoulli(self.rational()?)
        };
        self.end_of_line()?;
        Ok(DistributionDecl { name, prior })
    }

    fn utility_line(&mut self) -> PResult<()> {
        if self.at_ident("default") {
            let tok = self.bump();
            self.expect(TokenKind::Arrow, "`->`")?;
            let value = self.rational()?;
            self.end_of_line()?;
            if self.doc.default_utility.is_some() {
                self.diags.push(ParseDiagnostic::error(
                    tok.span,
                    "`default` is given more than once",
                    Some("default".into()),
                ));
            } else {
                self.doc.default_utility = Some(value);
            }
            return Ok(());
        }
        let when = self.expr()?;
        self.expect(TokenKind::Arrow, "`->`")?;
        let value = self.rational()?;
        self.end_of_line()?;
        self.doc.utility.push(UtilityDecl { when, value });
        Ok(())
    }

    fn reference_line(&mut self) -> PResult<ReferenceDecl> {
        let name = self.name("decision")?;
        self.expect(TokenKind::Assign, "`=`")?;
        let mut values = vec![self.label()?];
        while self.peek().kind == TokenKind::Comma {
            self.bump();
            values.push(self.label()?);
        }
        self.end_of_line()?;
        Ok(ReferenceDecl { name, values })
    }

    fn literal(&mut self) -> PResult<Literal> {
        let name = self.name("variable")?;
        self.expect(TokenKind::Assign, "`=`")?;
        let value = self.label()?;
        Ok(Literal { name, value })
    }

    fn literals(&mut self) -> PResult<Vec<Literal>> {
        let mut out = vec![self.literal()?];
        while self.peek().kind == TokenKind::Comma {
            self.bump();
            out.push(self.literal()?);
        }
        Ok(out)
    }

    fn given(&mut self) -> PResult<Vec<Literal>> {
        self.expect_keyword("given")?;
        self.literals()
    }

    fn query(&mut self) -> PResult<Query> {
        let kind = if self.at_ident("hkw") {
            self.bump();
            if self.at_ident("direct") {
                self.bump();
                let outcome = self.literals()?;
                let action = self.given()?;
                QueryKind::HkwDirect { outcome, action }
            } else if self.at_ident("affect") {
                self.bump();
                let mut variables = vec![self.name("variable")?];
                while self.peek().kind == TokenKind::Comma {
                    self.bump();
                    variables.push(self.name("variable")?);
                }
                let action = self.given()?;
                QueryKind::HkwAffect { variables, action }
            } else if self.at_ident("oblique") {
                self.bump();
                let side = self.literals()?;
                self.expect_keyword("via")?;
                let direct = self.literals()?;
                let action = self.given()?;
                QueryKind::HkwOblique {
                    side,
                    direct,
                    action,
                }
            } else {
                return Err(self.unexpected("`direct`, `affect` or `oblique`"));
            }
        } else if self.at_ident("kglt") {
            self.bump();
            if self.at_ident("intent") {
                self.bump();
                QueryKind::KgltIntent
            } else if self.at_ident("oblique") {
                self.bump();
                QueryKind::KgltOblique {
                    side: self.literal()?,
                }
            } else {
                return Err(self.unexpected("`intent` or `oblique`"));
            }
        } else {
            return Err(self.unexpected("`hkw` or `kglt`"));
        };
        let confidence = if self.at_ident("confidence") {
            self.bump();
            Some(self.rational()?)
        } else {
            None
        };
        Ok(Query { kind, confidence })
    }
}

fn is_integer(text: &str) -> bool {
    let digits = text.strip_prefix('-').unwrap_or(text);
    !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
}
