use super::ast::*;
use super::lexer::{lex, Kw, Tok};
use super::{Diagnostic, Span};

/// Parses a program. Stops at the first syntax error.
pub fn parse(src: &str) -> Result<Program, Diagnostic> {
    let toks = lex(src)?;
    let mut p = Parser { src, toks, pos: 0 };
    p.program()
}

struct Parser<'s> {
    src: &'s str,
    toks: Vec<(Tok, Span)>,
    pos: usize,
}

/// Parse failure plus how far the parser got, for choosing between
/// alternatives.
struct Fail {
    diag: Diagnostic,
    at: usize,
}

type PResult<T> = Result<T, Fail>;

impl<'s> Parser<'s> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].0
    }

    fn span(&self) -> Span {
        self.toks[self.pos].1
    }

    fn prev_end(&self) -> usize {
        if self.pos == 0 {
            0
        } else {
            self.toks[self.pos - 1].1.end
        }
    }

    fn bump(&mut self) -> (Tok, Span) {
        let t = self.toks[self.pos].clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, msg: impl Into<String>) -> PResult<T> {
        self.fail_at(self.span(), msg)
    }

    fn fail_at<T>(&self, span: Span, msg: impl Into<String>) -> PResult<T> {
        Err(Fail { diag: Diagnostic::error(self.src, span, msg), at: self.pos })
    }

    fn expected<T>(&self, what: &str) -> PResult<T> {
        self.fail(format!("expected {what}, found {}", self.peek().describe()))
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok, what: &str) -> PResult<Span> {
        if *self.peek() == t {
            Ok(self.bump().1)
        } else {
            self.expected(what)
        }
    }

    fn ident(&mut self, what: &str) -> PResult<Ident> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let sp = self.bump().1;
                Ok(Spanned::new(s, sp))
            }
            Tok::Kw(k) => self.fail(format!("'{}' is a reserved word and cannot be used as {what}", k.text())),
            _ => self.expected(what),
        }
    }

    fn program(&mut self) -> Result<Program, Diagnostic> {
        let r = (|| {
            self.expect(Tok::Kw(Kw::Task), "'task'")?;
            let name = match self.bump() {
                (Tok::Str(s), _) => s,
                (t, sp) => return self.fail_at(sp, format!("expected task name string, found {}", t.describe())),
            };
            self.expect(Tok::LBrace, "'{'")?;
            let items = self.items(true)?;
            self.expect(Tok::RBrace, "'}'")?;
            if *self.peek() != Tok::Eof {
                return self.expected("end of input");
            }
            Ok(Program { name, items })
        })();
        r.map_err(|f| f.diag)
    }

    fn items(&mut self, top: bool) -> PResult<Vec<Item>> {
        let mut items = Vec::new();
        loop {
            match self.peek() {
                Tok::Kw(Kw::Param) if top => items.push(Item::Param(self.param()?)),
                Tok::Kw(Kw::Param) => return self.fail("parameters must be declared at the top level"),
                Tok::Kw(Kw::Let) => items.push(Item::Let(self.let_decl()?)),
                Tok::Kw(Kw::Constraint) => items.push(Item::Constraint(self.constraint()?)),
                Tok::Kw(Kw::For) => items.push(Item::For(self.for_loop()?)),
                Tok::RBrace => return Ok(items),
                _ => return self.expected("'param', 'let', 'constraint', 'for' or '}'"),
            }
        }
    }

    fn param(&mut self) -> PResult<ParamDecl> {
        self.bump();
        let name = self.ident("a parameter name")?;
        self.expect(Tok::Colon, "':'")?;
        let ty = match self.bump() {
            (Tok::Kw(Kw::Float), _) => ParamType::Float,
            (Tok::Kw(Kw::Vec3), _) => ParamType::Vec3,
            (t, sp) => return self.fail_at(sp, format!("expected 'float' or 'vec3', found {}", t.describe())),
        };
        let default = if self.eat(&Tok::Assign) { Some(self.literal()?) } else { None };
        self.expect(Tok::Semi, "';'")?;
        Ok(ParamDecl { name, ty, default })
    }

    /// Number, negated number or vector of those.
    fn literal(&mut self) -> PResult<Spanned<Expr>> {
        let start = self.span().start;
        match self.peek() {
            Tok::LBracket => {
                self.bump();
                let mut els = Vec::new();
                loop {
                    els.push(self.scalar_literal()?);
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
                self.expect(Tok::RBracket, "']'")?;
                Ok(Spanned::new(Expr::Vector(els), Span::new(start, self.prev_end())))
            }
            _ => self.scalar_literal(),
        }
    }

    fn scalar_literal(&mut self) -> PResult<Spanned<Expr>> {
        let start = self.span().start;
        if self.eat(&Tok::Minus) {
            let inner = self.number()?;
            return Ok(Spanned::new(Expr::Neg(Box::new(inner)), Span::new(start, self.prev_end())));
        }
        self.number()
    }

    fn number(&mut self) -> PResult<Spanned<Expr>> {
        match self.peek().clone() {
            Tok::Number(text) => {
                let sp = self.bump().1;
                let v: f64 = text.parse().map_err(|_| Fail {
                    diag: Diagnostic::error(self.src, sp, format!("invalid number '{text}'")),
                    at: self.pos,
                })?;
                Ok(Spanned::new(Expr::Number(v), sp))
            }
            _ => self.expected("a number"),
        }
    }

    fn int(&mut self) -> PResult<(i64, Span)> {
        match self.peek().clone() {
            Tok::Number(text) => {
                let sp = self.span();
                match text.parse::<i64>() {
                    Ok(v) => {
                        self.bump();
                        Ok((v, sp))
                    }
                    Err(_) => self.fail(format!("expected an integer, found {text}")),
                }
            }
            _ => self.expected("an integer"),
        }
    }

    fn let_decl(&mut self) -> PResult<LetDecl> {
        self.bump();
        let name = self.ident("a binding name")?;
        self.expect(Tok::Assign, "'='")?;
        let value = self.expr()?;
        self.expect(Tok::Semi, "';'")?;
        Ok(LetDecl { name, value })
    }

    fn constraint(&mut self) -> PResult<ConstraintDecl> {
        self.bump();
        let selector = self.selector()?;
        self.expect(Tok::Colon, "':' after the frame selector")?;
        let pred = self.pred()?;
        let weight = if self.eat(&Tok::Kw(Kw::Weight)) { Some(self.expr()?) } else { None };
        self.expect(Tok::Semi, "';'")?;
        Ok(ConstraintDecl { selector, pred, weight })
    }

    fn selector(&mut self) -> PResult<Spanned<Selector>> {
        let start = self.span().start;
        let sel = match self.bump() {
            (Tok::Kw(Kw::All), _) => {
                self.expect(Tok::Kw(Kw::Frames), "'frames' after 'all'")?;
                Selector::All
            }
            (Tok::Kw(Kw::Frame), _) => Selector::At(self.fref()?),
            (Tok::Kw(Kw::Frames), _) => {
                if self.eat(&Tok::LBracket) {
                    let mut refs = vec![self.fref()?];
                    while self.eat(&Tok::Comma) {
                        refs.push(self.fref()?);
                    }
                    self.expect(Tok::RBracket, "']'")?;
                    Selector::Set(refs)
                } else {
                    let a = self.fref()?;
                    self.expect(Tok::DotDot, "'..'")?;
                    let b = self.fref()?;
                    Selector::Range(a, b)
                }
            }
            (t, sp) => {
                return self.fail_at(
                    sp,
                    format!("expected a frame selector ('all frames', 'frame', 'frames'), found {}", t.describe()),
                )
            }
        };
        Ok(Spanned::new(sel, Span::new(start, self.prev_end())))
    }

    fn fref(&mut self) -> PResult<Spanned<FrameRefAst>> {
        let sp = self.span();
        let r = match self.peek().clone() {
            Tok::Kw(Kw::First) => FrameRefAst::First,
            Tok::Kw(Kw::Mid) => FrameRefAst::Mid,
            Tok::Kw(Kw::Last) => FrameRefAst::Last,
            Tok::Ident(s) => FrameRefAst::Var(s),
            Tok::Number(_) => {
                let (v, sp) = self.int()?;
                return Ok(Spanned::new(FrameRefAst::Index(v), sp));
            }
            _ => return self.expected("a frame (integer, 'first', 'mid', 'last' or loop variable)"),
        };
        self.bump();
        Ok(Spanned::new(r, sp))
    }

    fn for_loop(&mut self) -> PResult<ForLoop> {
        self.bump();
        let var = self.ident("a loop variable")?;
        self.expect(Tok::Kw(Kw::In), "'in'")?;
        let start = self.span().start;
        let domain = match self.peek().clone() {
            Tok::Ident(s) if s == "joints" => {
                self.bump();
                ForDomain::Joints
            }
            Tok::LBracket => {
                self.bump();
                let mut names = vec![self.ident("a joint name")?];
                while self.eat(&Tok::Comma) {
                    names.push(self.ident("a joint name")?);
                }
                self.expect(Tok::RBracket, "']'")?;
                ForDomain::List(names)
            }
            Tok::Number(_) => {
                let (a, _) = self.int()?;
                self.expect(Tok::DotDot, "'..'")?;
                let (b, sp) = self.int()?;
                if b < a {
                    return self.fail_at(sp, format!("empty range {a}..{b}"));
                }
                ForDomain::Range(a, b)
            }
            _ => return self.expected("'joints', a joint list or an integer range"),
        };
        let domain = Spanned::new(domain, Span::new(start, self.prev_end()));
        self.expect(Tok::LBrace, "'{'")?;
        let body = self.items(false)?;
        self.expect(Tok::RBrace, "'}'")?;
        Ok(ForLoop { var, domain, body })
    }

    // pred := conj ("or" conj)*
    fn pred(&mut self) -> PResult<Spanned<Pred>> {
        let start = self.span().start;
        let mut lhs = self.conj()?;
        while self.eat(&Tok::Kw(Kw::Or)) {
            let rhs = self.conj()?;
            lhs = Spanned::new(Pred::Or(Box::new(lhs), Box::new(rhs)), Span::new(start, self.prev_end()));
        }
        Ok(lhs)
    }

    // conj := primary ("and" primary)*
    fn conj(&mut self) -> PResult<Spanned<Pred>> {
        let start = self.span().start;
        let mut lhs = self.pred_primary()?;
        while self.eat(&Tok::Kw(Kw::And)) {
            let rhs = self.pred_primary()?;
            lhs = Spanned::new(Pred::And(Box::new(lhs), Box::new(rhs)), Span::new(start, self.prev_end()));
        }
        Ok(lhs)
    }

    fn pred_primary(&mut self) -> PResult<Spanned<Pred>> {
        let start = self.span().start;
        match self.peek() {
            Tok::Kw(Kw::When) => {
                self.bump();
                self.expect(Tok::LParen, "'(' after 'when'")?;
                let guard = self.cmp()?;
                self.expect(Tok::RParen, "')'")?;
                let body = self.pred_primary()?;
                Ok(Spanned::new(Pred::When(Box::new(guard), Box::new(body)), Span::new(start, self.prev_end())))
            }
            Tok::LParen => {
                // either a grouped predicate or a comparison whose left side
                // starts with a parenthesized expression
                let save = self.pos;
                let grouped: PResult<Spanned<Pred>> = (|| {
                    self.bump();
                    let p = self.pred()?;
                    self.expect(Tok::RParen, "')'")?;
                    Ok(Spanned::new(p.node, Span::new(start, self.prev_end())))
                })();
                let continues = matches!(
                    self.peek(),
                    Tok::EqEq | Tok::Lt | Tok::Gt | Tok::Plus | Tok::Minus | Tok::Star | Tok::Slash | Tok::Dot
                );
                let group_err = match grouped {
                    Ok(p) if !continues => return Ok(p),
                    Ok(_) => None,
                    Err(f) => Some(f),
                };
                self.pos = save;
                match self.cmp() {
                    Ok(c) => Ok(Spanned::new(Pred::Cmp(c.node), c.span)),
                    Err(f) => Err(match group_err {
                        Some(g) if g.at > f.at => g,
                        _ => f,
                    }),
                }
            }
            _ => {
                let c = self.cmp()?;
                Ok(Spanned::new(Pred::Cmp(c.node), c.span))
            }
        }
    }

    fn cmp(&mut self) -> PResult<Spanned<Cmp>> {
        let start = self.span().start;
        if self.eat(&Tok::Kw(Kw::Far)) {
            self.expect(Tok::LParen, "'(' after 'far'")?;
            let e = self.expr()?;
            self.expect(Tok::Comma, "','")?;
            let bound = self.expr()?;
            self.expect(Tok::RParen, "')'")?;
            return Ok(Spanned::new(Cmp::Far(e, bound), Span::new(start, self.prev_end())));
        }
        let lhs = self.expr()?;
        let c = match self.peek() {
            Tok::EqEq => {
                self.bump();
                let rhs = self.expr()?;
                let norm = match self.peek() {
                    Tok::Ident(s) if s == "norm" && matches!(self.peek_at(1), Tok::Number(_)) => {
                        self.bump();
                        let n = self.number()?;
                        let Expr::Number(v) = n.node else { unreachable!() };
                        Some(Spanned::new(v, n.span))
                    }
                    _ => None,
                };
                Cmp::Eq { lhs, rhs, norm }
            }
            Tok::Lt => {
                self.bump();
                Cmp::Lt(lhs, self.expr()?)
            }
            Tok::Gt => {
                self.bump();
                Cmp::Gt(lhs, self.expr()?)
            }
            _ => return self.expected("a comparison ('==', '<' or '>')"),
        };
        Ok(Spanned::new(c, Span::new(start, self.prev_end())))
    }

    fn expr(&mut self) -> PResult<Spanned<Expr>> {
        self.binary(1)
    }

    fn binary(&mut self, min_prec: u8) -> PResult<Spanned<Expr>> {
        let start = self.span().start;
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            if op.precedence() < min_prec {
                return Ok(lhs);
            }
            self.bump();
            let rhs = self.binary(op.precedence() + 1)?;
            lhs = Spanned::new(Expr::Binary(op, Box::new(lhs), Box::new(rhs)), Span::new(start, self.prev_end()));
        }
    }

    fn unary(&mut self) -> PResult<Spanned<Expr>> {
        let start = self.span().start;
        if self.eat(&Tok::Minus) {
            let inner = self.unary()?;
            return Ok(Spanned::new(Expr::Neg(Box::new(inner)), Span::new(start, self.prev_end())));
        }
        self.postfix()
    }

    fn postfix(&mut self) -> PResult<Spanned<Expr>> {
        let start = self.span().start;
        let mut e = self.atom()?;
        while self.eat(&Tok::Dot) {
            let sp = self.span();
            let field = match self.peek() {
                Tok::Ident(s) => Field::ALL.iter().find(|(n, _)| n == s).map(|(_, f)| *f),
                _ => None,
            };
            let Some(field) = field else {
                return self.expected("a field (pos, vel, acc, x, y, z)");
            };
            self.bump();
            e = Spanned::new(Expr::Field(Box::new(e), Spanned::new(field, sp)), Span::new(start, self.prev_end()));
        }
        Ok(e)
    }

    fn atom(&mut self) -> PResult<Spanned<Expr>> {
        let start = self.span().start;
        match self.peek().clone() {
            Tok::Number(_) => self.number(),
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(Spanned::new(e.node, Span::new(start, self.prev_end())))
            }
            Tok::LBracket => {
                self.bump();
                let mut els = vec![self.expr()?];
                while self.eat(&Tok::Comma) {
                    els.push(self.expr()?);
                }
                self.expect(Tok::RBracket, "']'")?;
                Ok(Spanned::new(Expr::Vector(els), Span::new(start, self.prev_end())))
            }
            Tok::Ident(name) => {
                let sp = self.bump().1;
                if !self.eat(&Tok::LParen) {
                    return Ok(Spanned::new(Expr::Name(name), sp));
                }
                if name == "joint" {
                    let j = self.ident("a joint name")?;
                    self.expect(Tok::RParen, "')'")?;
                    return Ok(Spanned::new(Expr::Joint(j), Span::new(start, self.prev_end())));
                }
                let mut args = Vec::new();
                if !self.eat(&Tok::RParen) {
                    args.push(self.expr()?);
                    while self.eat(&Tok::Comma) {
                        args.push(self.expr()?);
                    }
                    self.expect(Tok::RParen, "')' or ','")?;
                }
                Ok(Spanned::new(Expr::Call(Spanned::new(name, sp), args), Span::new(start, self.prev_end())))
            }
            Tok::Kw(k) => self.fail(format!("reserved word '{}' cannot appear in an expression", k.text())),
            _ => self.expected("an expression"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_task() {
        let p = parse("task \"t\" {}").unwrap();
        assert_eq!(p, Program { name: "t".into(), items: vec![] });
    }

    #[test]
    fn precedence_and_binds_tighter() {
        let p = parse("task \"t\" { constraint all frames: 1 < 2 or 3 < 4 and 5 < 6; }").unwrap();
        let Item::Constraint(c) = &p.items[0] else { panic!() };
        let Pred::Or(_, rhs) = &c.pred.node else { panic!("top is or") };
        assert!(matches!(rhs.node, Pred::And(..)));
    }

    #[test]
    fn arithmetic_precedence() {
        let p = parse("task \"t\" { let a = 1 - 2 * 3 - 4; }").unwrap();
        let Item::Let(l) = &p.items[0] else { panic!() };
        // (1 - (2*3)) - 4
        let Expr::Binary(BinOp::Sub, lhs, rhs) = &l.value.node else { panic!() };
        assert_eq!(rhs.node, Expr::Number(4.0));
        assert!(matches!(lhs.node, Expr::Binary(BinOp::Sub, _, _)));
    }

    #[test]
    fn parenthesized_comparison_and_group() {
        let src = "task \"t\" { constraint all frames: (1 + 2) * 3 < 4; constraint all frames: (1 < 2 or 3 < 4) and far(5, 1); }";
        let p = parse(src).unwrap();
        let Item::Constraint(c) = &p.items[0] else { panic!() };
        assert!(matches!(c.pred.node, Pred::Cmp(Cmp::Lt(..))));
        let Item::Constraint(c) = &p.items[1] else { panic!() };
        let Pred::And(l, r) = &c.pred.node else { panic!() };
        assert!(matches!(l.node, Pred::Or(..)));
        assert!(matches!(r.node, Pred::Cmp(Cmp::Far(..))));
    }

    #[test]
    fn selectors_and_loops() {
        let src = "task \"t\" {
            param h: float = -0.5;
            for j in [left_hand, head] { constraint frames 0..last: joint(j).pos.y > h; }
            for i in 0..3 { constraint frame i: joint(head).vel == [0, 0, 1] norm 1; }
            constraint frames [first, mid, 7]: joint(head).pos.y == 1 weight 2 * 0.5;
        }";
        let p = parse(src).unwrap();
        assert_eq!(p.items.len(), 4);
        let Item::For(f) = &p.items[2] else { panic!() };
        assert_eq!(f.domain.node, ForDomain::Range(0, 3));
    }

    #[test]
    fn errors_carry_position() {
        let d = parse("task \"t\" {\n  constraint all frames: 1 < ;\n}").unwrap_err();
        assert_eq!((d.line, d.col), (2, 30));
        let d = parse("task \"t\" {\n  let first = 1;\n}").unwrap_err();
        assert_eq!((d.line, d.col), (2, 7));
        assert!(d.message.contains("reserved"));
        let d = parse("task \"t\" {\n  constraint all frames: 1 < 2;\n").unwrap_err();
        assert_eq!(d.line, 3);
    }
}
