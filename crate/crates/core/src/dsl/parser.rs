use super::lexer::{tokenize, Tok, Token};
use super::{codes, Diagnostic};
use crate::model::*;

/// Keywords that start a top-level item; the parser resynchronizes on these.
const ITEM_KEYWORDS: &[&str] = &["class", "enum", "association", "agent", "page"];

/// Marker for a syntax error that has already been recorded.
struct Reported;

type PResult<T> = Result<T, Reported>;

/// Parses a `.buml` document.
///
/// Never panics: any input yields either a model or at least one error
/// diagnostic (E900 lexical, E901 syntax). After a syntax error the parser
/// skips to the next top-level item keyword, so several independent errors
/// are reported in one pass.
/// Syntax errors located after the first lexical error are not reported.
pub fn parse_model(src: &str) -> Result<Model, Vec<Diagnostic>> {
    let (tokens, lex_diags) = tokenize(src);
    let first_lex_error = lex_diags.iter().map(|d| d.span).min();
    let mut parser = Parser { tokens, pos: 0, diags: Vec::new() };
    let model = parser.document();
    // Syntax errors after a lexical error are usually its echo (an
    // unterminated string swallows the rest of the line), so drop them.
    let mut diags = lex_diags;
    diags.extend(parser.diags.into_iter().filter(|d| first_lex_error.is_none_or(|first| d.span < first)));
    if diags.is_empty() {
        Ok(model)
    } else {
        diags.sort_by(|a, b| a.span.cmp(&b.span).then(a.code.cmp(b.code)));
        Err(diags)
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Case {
    Pascal,
    Snake,
}

impl Case {
    fn describe(self) -> &'static str {
        match self {
            Case::Pascal => "PascalCase identifier",
            Case::Snake => "snake_case identifier",
        }
    }

    fn accepts(self, word: &str) -> bool {
        let mut chars = word.chars();
        let Some(first) = chars.next() else { return false };
        match self {
            Case::Pascal => first.is_ascii_uppercase() && chars.all(|c| c.is_ascii_alphanumeric()),
            Case::Snake => {
                (first.is_ascii_lowercase() || first == '_')
                    && chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
            }
        }
    }
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    diags: Vec<Diagnostic>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn current(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn advance(&mut self) -> Token {
        let tok = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        tok
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Keyword(k) if *k == kw)
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.at_keyword(kw) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.advance();
            true
        } else {
            false
        }
    }

    fn unexpected<T>(&mut self, expected: &str) -> PResult<T> {
        let token = self.current().clone();
        self.diags.push(Diagnostic::error(
            codes::E901,
            format!("expected {expected}, found {}", token.tok),
            token.span,
        ));
        Err(Reported)
    }

    fn expect(&mut self, tok: Tok) -> PResult<Token> {
        if *self.peek() == tok {
            Ok(self.advance())
        } else {
            self.unexpected(&tok.to_string())
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> PResult<Token> {
        if self.at_keyword(kw) {
            Ok(self.advance())
        } else {
            self.unexpected(&format!("`{kw}`"))
        }
    }

    fn ident(&mut self, case: Case) -> PResult<(String, Loc)> {
        match self.peek().clone() {
            Tok::Ident(word) if case.accepts(&word) => {
                let span = self.advance().span;
                Ok((word, Loc(span)))
            }
            _ => self.unexpected(case.describe()),
        }
    }

    fn string(&mut self) -> PResult<(String, Loc)> {
        match self.peek().clone() {
            Tok::Str(text) => {
                let span = self.advance().span;
                Ok((text, Loc(span)))
            }
            _ => self.unexpected("string literal"),
        }
    }

    fn int(&mut self) -> PResult<(u32, Loc)> {
        match *self.peek() {
            Tok::Int(n) => {
                let span = self.current().span;
                match u32::try_from(n) {
                    Ok(n) => {
                        self.advance();
                        Ok((n, Loc(span)))
                    }
                    Err(_) => self.unexpected("integer no larger than 4294967295"),
                }
            }
            _ => self.unexpected("integer"),
        }
    }

    /// Skips to the next top-level item keyword (or end of input).
    fn recover(&mut self) {
        loop {
            match self.peek() {
                Tok::Eof => return,
                Tok::Keyword(k) if ITEM_KEYWORDS.contains(k) => return,
                _ => {
                    self.advance();
                }
            }
        }
    }

    fn document(&mut self) -> Model {
        let mut model = Model::default();
        let header = self
            .expect_keyword("model")
            .and_then(|_| self.ident(Case::Pascal));
        match header {
            Ok((name, _)) => model.name = name,
            Err(Reported) => self.recover(),
        }

        loop {
            let result = match self.peek() {
                Tok::Eof => break,
                Tok::Keyword("class") => self.entity().map(|e| model.entities.push(e)),
                Tok::Keyword("enum") => self.enumeration().map(|e| model.enums.push(e)),
                Tok::Keyword("association") => self.association().map(|a| model.associations.push(a)),
                Tok::Keyword("agent") => self.agent().map(|a| model.agents.push(a)),
                Tok::Keyword("page") => self.page().map(|p| model.pages.push(p)),
                _ => self.unexpected("`class`, `enum`, `association`, `agent` or `page`"),
            };
            if result.is_err() {
                // Always make progress, even when the error was at an item keyword.
                if matches!(self.peek(), Tok::Keyword(k) if ITEM_KEYWORDS.contains(k)) {
                    self.advance();
                }
                self.recover();
            }
        }
        model
    }

    fn type_ref(&mut self) -> PResult<(TypeRef, Loc)> {
        match self.peek().clone() {
            Tok::Keyword(k) => match Primitive::from_keyword(k) {
                Some(p) => Ok((TypeRef::Primitive(p), Loc(self.advance().span))),
                None => self.unexpected("type"),
            },
            Tok::Ident(word) if Case::Pascal.accepts(&word) => {
                Ok((TypeRef::Named(word), Loc(self.advance().span)))
            }
            _ => self.unexpected("type"),
        }
    }

    fn entity(&mut self) -> PResult<EntityDef> {
        self.expect_keyword("class")?;
        let (name, loc) = self.ident(Case::Pascal)?;
        self.expect(Tok::LBrace)?;
        let mut entity = EntityDef { name, loc, ..Default::default() };

        loop {
            let slot = match self.peek() {
                Tok::Keyword("description") => &mut entity.description,
                Tok::Keyword("uri") => &mut entity.uri,
                Tok::Keyword("icon") => &mut entity.icon,
                _ => break,
            };
            if slot.is_some() {
                return self.unexpected("attribute or method (meta-attribute already set)");
            }
            self.advance();
            self.expect(Tok::Colon)?;
            let (text, _) = self.string()?;
            *slot = Some(text);
        }

        loop {
            if self.eat_keyword("attr") {
                let (name, loc) = self.ident(Case::Snake)?;
                self.expect(Tok::Colon)?;
                let (ty, ty_loc) = self.type_ref()?;
                let mut required = false;
                if self.eat(&Tok::LBracket) {
                    self.expect_keyword("required")?;
                    self.expect(Tok::RBracket)?;
                    required = true;
                }
                entity.attributes.push(AttributeDef { name, ty, required, loc, ty_loc });
            } else if self.eat_keyword("method") {
                let (name, loc) = self.ident(Case::Snake)?;
                self.expect(Tok::LParen)?;
                let mut params = Vec::new();
                if !self.eat(&Tok::RParen) {
                    loop {
                        let (pname, ploc) = self.ident(Case::Snake)?;
                        self.expect(Tok::Colon)?;
                        let (ty, ty_loc) = self.type_ref()?;
                        params.push(ParamDef { name: pname, ty, loc: ploc, ty_loc });
                        if !self.eat(&Tok::Comma) {
                            break;
                        }
                    }
                    self.expect(Tok::RParen)?;
                }
                let (return_type, return_loc) = if self.eat(&Tok::Arrow) {
                    let (ty, l) = self.type_ref()?;
                    (Some(ty), l)
                } else {
                    (None, Loc::default())
                };
                entity.methods.push(MethodDef { name, params, return_type, loc, return_loc });
            } else {
                break;
            }
        }
        self.expect(Tok::RBrace)?;
        Ok(entity)
    }

    fn enumeration(&mut self) -> PResult<EnumDef> {
        self.expect_keyword("enum")?;
        let (name, loc) = self.ident(Case::Pascal)?;
        self.expect(Tok::LBrace)?;
        let mut literals = vec![self.ident(Case::Snake)?.0];
        while self.eat(&Tok::Comma) {
            literals.push(self.ident(Case::Snake)?.0);
        }
        self.expect(Tok::RBrace)?;
        Ok(EnumDef { name, literals, loc })
    }

    fn association_end(&mut self) -> PResult<AssociationEnd> {
        let (role, loc) = self.ident(Case::Snake)?;
        self.expect(Tok::Colon)?;
        let (target, _) = self.ident(Case::Pascal)?;
        self.expect(Tok::LBracket)?;
        let (lower, _) = self.int()?;
        self.expect(Tok::DotDot)?;
        let upper = if self.eat(&Tok::Star) {
            UpperBound::Unbounded
        } else {
            let (upper, _) = self.int()?;
            if upper == 0 || upper < lower {
                self.pos -= 1;
                return self.unexpected(&format!("upper bound of at least max(1, {lower})"));
            }
            UpperBound::Bounded(upper)
        };
        self.expect(Tok::RBracket)?;
        Ok(AssociationEnd { role, target, multiplicity: Multiplicity { lower, upper }, loc })
    }

    fn association(&mut self) -> PResult<AssociationDef> {
        self.expect_keyword("association")?;
        let (name, loc) = self.ident(Case::Pascal)?;
        self.expect(Tok::LBrace)?;
        let end_a = self.association_end()?;
        let end_b = self.association_end()?;
        self.expect(Tok::RBrace)?;
        Ok(AssociationDef { name, end_a, end_b, loc })
    }

    fn agent(&mut self) -> PResult<AgentModel> {
        self.expect_keyword("agent")?;
        let (name, loc) = self.ident(Case::Pascal)?;
        self.expect(Tok::LBrace)?;
        let mut agent = AgentModel { name, loc, ..Default::default() };

        while self.eat_keyword("intent") {
            let (name, loc) = self.ident(Case::Snake)?;
            self.expect(Tok::LBrace)?;
            let mut sentences = vec![self.string()?.0];
            while self.eat(&Tok::Semi) {
                sentences.push(self.string()?.0);
            }
            self.expect(Tok::RBrace)?;
            agent.intents.push(IntentDef { name, sentences, loc });
        }

        while self.eat_keyword("state") {
            agent.states.push(self.state()?);
        }
        self.expect(Tok::RBrace)?;
        Ok(agent)
    }

    fn state(&mut self) -> PResult<StateDef> {
        let (name, loc) = self.ident(Case::Pascal)?;
        let initial = self.eat_keyword("initial");
        self.expect(Tok::LBrace)?;
        let mut state = StateDef { name, initial, loc, ..Default::default() };

        loop {
            let span = self.current().span;
            let action = if self.eat_keyword("say") {
                Action::Say(self.string()?.0)
            } else if self.eat_keyword("llm") {
                Action::LlmReply(self.string()?.0)
            } else if self.eat_keyword("call") {
                let (entity, _) = self.ident(Case::Pascal)?;
                self.expect(Tok::Dot)?;
                let (method, _) = self.ident(Case::Snake)?;
                Action::CallMethod { entity, method }
            } else {
                break;
            };
            state.actions.push(ActionSpec { action, loc: Loc(span) });
        }

        loop {
            let span = self.current().span;
            let trigger = if self.eat_keyword("on") {
                Trigger::OnIntent(self.ident(Case::Snake)?.0)
            } else if self.eat_keyword("auto") {
                Trigger::Auto
            } else if self.eat_keyword("fallback") {
                Trigger::Fallback
            } else {
                break;
            };
            self.expect(Tok::Arrow)?;
            let (target, target_loc) = self.ident(Case::Pascal)?;
            state.transitions.push(TransitionSpec { trigger, target, loc: Loc(span), target_loc });
        }
        self.expect(Tok::RBrace)?;
        Ok(state)
    }

    fn page(&mut self) -> PResult<PageDef> {
        self.expect_keyword("page")?;
        let (name, loc) = self.ident(Case::Pascal)?;
        self.expect(Tok::LBrace)?;
        let mut page = PageDef { name, loc, ..Default::default() };

        if self.eat_keyword("style") {
            self.expect(Tok::LBrace)?;
            while !self.eat(&Tok::RBrace) {
                let (key, _) = self.ident(Case::Snake)?;
                self.expect(Tok::Colon)?;
                let value = match self.peek().clone() {
                    Tok::Str(s) | Tok::Ident(s) => {
                        self.advance();
                        s
                    }
                    _ => return self.unexpected("string or identifier"),
                };
                page.style.push((key, value));
            }
        }

        loop {
            let span = self.current().span;
            let component = if self.eat_keyword("table") {
                let (name, _) = self.ident(Case::Pascal)?;
                self.expect_keyword("binds")?;
                let (entity, _) = self.ident(Case::Pascal)?;
                self.expect(Tok::LBrace)?;
                self.expect_keyword("columns")?;
                self.expect(Tok::Colon)?;
                let mut columns = vec![self.ident(Case::Snake)?.0];
                while self.eat(&Tok::Comma) {
                    columns.push(self.ident(Case::Snake)?.0);
                }
                self.expect(Tok::RBrace)?;
                ComponentDef::DataTable { name, entity, columns, loc: Loc(span) }
            } else if self.eat_keyword("form") {
                let (name, _) = self.ident(Case::Pascal)?;
                self.expect_keyword("creates")?;
                let (entity, _) = self.ident(Case::Pascal)?;
                ComponentDef::Form { name, entity, loc: Loc(span) }
            } else if self.eat_keyword("button") {
                let (name, _) = self.ident(Case::Pascal)?;
                self.expect_keyword("invokes")?;
                let (entity, _) = self.ident(Case::Pascal)?;
                self.expect(Tok::Dot)?;
                let (method, _) = self.ident(Case::Snake)?;
                ComponentDef::ActionButton { name, entity, method, loc: Loc(span) }
            } else if self.eat_keyword("chart") {
                let (name, _) = self.ident(Case::Pascal)?;
                self.expect_keyword("binds")?;
                let (entity, _) = self.ident(Case::Pascal)?;
                self.expect(Tok::LBrace)?;
                self.expect_keyword("kind")?;
                self.expect(Tok::Colon)?;
                let chart = match self.peek() {
                    Tok::Keyword(k) if ChartKind::from_keyword(k).is_some() => {
                        let kind = ChartKind::from_keyword(k);
                        self.advance();
                        kind.unwrap_or(ChartKind::Bar)
                    }
                    _ => return self.unexpected("`bar`, `line` or `pie`"),
                };
                self.expect(Tok::Comma)?;
                self.expect_keyword("x")?;
                self.expect(Tok::Colon)?;
                let (x, _) = self.ident(Case::Snake)?;
                self.expect(Tok::Comma)?;
                self.expect_keyword("y")?;
                self.expect(Tok::Colon)?;
                let (y, _) = self.ident(Case::Snake)?;
                self.expect(Tok::RBrace)?;
                ComponentDef::Chart { name, entity, chart, x, y, loc: Loc(span) }
            } else if self.eat_keyword("chat") {
                let (name, _) = self.ident(Case::Pascal)?;
                self.expect_keyword("agent")?;
                let (agent, _) = self.ident(Case::Pascal)?;
                ComponentDef::ChatWidget { name, agent, loc: Loc(span) }
            } else {
                break;
            };
            page.components.push(component);
        }
        self.expect(Tok::RBrace)?;
        Ok(page)
    }
}
