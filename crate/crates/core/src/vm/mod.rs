//! The style interpreter: a postfix stack machine over the entries cited in
//! an `.aux` file.
//!
//! Commands run in file order. `READ` resolves the unique citations against
//! the databases, `EXECUTE` calls a function once with no current entry,
//! `ITERATE` calls it once per entry, and `SORT` orders the entries by their
//! `sort.key$`. The stack must be empty when the last command finishes.

mod builtins;
mod value;

use std::collections::HashMap;
use std::sync::Arc;

use thiserror::Error;

use crate::aux::{unique_citation_order, AuxFile};
use crate::bib::{Database, Entry};
use crate::bst::{BstCommand, BstProgram, BstToken, TokenKind, UNSUPPORTED_BUILTINS};
use crate::output::{BblDocument, BlgLog};

pub use value::{format_stack, FuncRef, VmValue};

/// Name of the per-entry string variable `SORT` orders by.
pub const SORT_KEY: &str = "sort.key$";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{message} (line {line})")]
pub struct VmError {
    pub message: String,
    pub line: usize,
}

impl VmError {
    pub(crate) fn new(line: usize, message: impl Into<String>) -> Self {
        VmError {
            message: message.into(),
            line,
        }
    }
}

pub type VmResult<T> = Result<T, VmError>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VmOptions {
    /// Maximum iterations of a single `while$` before it is reported as divergent.
    pub while_limit: u64,
    /// Maximum nesting of function calls.
    pub max_call_depth: usize,
}

impl Default for VmOptions {
    fn default() -> Self {
        VmOptions {
            while_limit: 1_000_000,
            max_call_depth: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum VarType {
    Int,
    Str,
}

/// A cited entry plus its per-entry variables.
#[derive(Debug, Clone)]
pub struct EntryState<'a> {
    pub entry: &'a Entry,
    pub ints: Vec<i64>,
    pub strs: Vec<String>,
    pub sort_key: String,
}

/// Everything a finished run produced.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub bbl: BblDocument,
    pub log: BlgLog,
    /// Citation keys of the entry list in its final order.
    pub entry_keys: Vec<String>,
    /// What was left on the stack (empty for a well-formed style).
    pub final_stack: Vec<VmValue>,
    /// Whether execution stopped early on a runtime error.
    pub aborted: bool,
}

impl RunOutput {
    pub fn bbl_text(&self) -> String {
        self.bbl.render()
    }

    pub fn has_errors(&self) -> bool {
        self.log.error_count() > 0
    }
}

pub fn run(program: &BstProgram, aux: &AuxFile, dbs: &[Database]) -> RunOutput {
    run_with_options(program, aux, dbs, &VmOptions::default())
}

pub fn run_with_options(program: &BstProgram, aux: &AuxFile, dbs: &[Database], options: &VmOptions) -> RunOutput {
    let mut vm = Vm::new(aux, dbs, options.clone());
    let result = program.commands.iter().try_for_each(|cmd| vm.execute_command(cmd));
    let aborted = match result {
        Ok(()) => {
            if !vm.stack.is_empty() {
                let msg = format!("stack not empty at end of style: {}", format_stack(&vm.stack));
                vm.log.log_error(msg);
            }
            false
        }
        Err(e) => {
            vm.log.log_error(e.to_string());
            true
        }
    };
    vm.bbl.finalize();
    RunOutput {
        entry_keys: vm.entries.iter().map(|e| e.entry.key.clone()).collect(),
        final_stack: vm.stack,
        bbl: vm.bbl,
        log: vm.log,
        aborted,
    }
}

/// Interpreter state for one run.
pub struct Vm<'a> {
    aux: &'a AuxFile,
    dbs: &'a [Database],
    options: VmOptions,
    stack: Vec<VmValue>,
    fields: Vec<String>,
    entry_ints: Vec<String>,
    entry_strs: Vec<String>,
    globals: HashMap<String, (VarType, VmValue)>,
    functions: HashMap<String, Arc<[BstToken]>>,
    entries: Vec<EntryState<'a>>,
    current: Option<usize>,
    depth: usize,
    bbl: BblDocument,
    log: BlgLog,
}

impl<'a> Vm<'a> {
    pub fn new(aux: &'a AuxFile, dbs: &'a [Database], options: VmOptions) -> Self {
        Vm {
            aux,
            dbs,
            options,
            stack: Vec::new(),
            fields: Vec::new(),
            entry_ints: Vec::new(),
            entry_strs: Vec::new(),
            globals: HashMap::new(),
            functions: HashMap::new(),
            entries: Vec::new(),
            current: None,
            depth: 0,
            bbl: BblDocument::new(),
            log: BlgLog::new(),
        }
    }

    pub fn stack(&self) -> &[VmValue] {
        &self.stack
    }

    pub fn push(&mut self, value: VmValue) {
        self.stack.push(value);
    }

    pub fn bbl(&self) -> &BblDocument {
        &self.bbl
    }

    pub fn log(&self) -> &BlgLog {
        &self.log
    }

    pub fn entries(&self) -> &[EntryState<'a>] {
        &self.entries
    }

    pub fn current_entry(&self) -> Option<&EntryState<'a>> {
        self.current.map(|i| &self.entries[i])
    }

    /// Selects the entry that field and `cite$` lookups refer to, as ITERATE does.
    pub fn set_current_entry(&mut self, index: Option<usize>) {
        assert!(index.is_none_or(|i| i < self.entries.len()));
        self.current = index;
    }

    pub fn global(&self, name: &str) -> Option<&VmValue> {
        self.globals.get(name).map(|(_, v)| v)
    }

    pub fn execute_command(&mut self, cmd: &BstCommand) -> VmResult<()> {
        match cmd {
            BstCommand::Entry {
                fields,
                integers,
                strings,
                ..
            } => {
                self.fields = fields.clone();
                self.entry_ints = integers.clone();
                self.entry_strs = strings.clone();
            }
            BstCommand::Function { name, body, .. } => {
                self.functions.insert(name.clone(), body.clone());
            }
            BstCommand::Strings { names, .. } => {
                for n in names {
                    self.globals.insert(n.clone(), (VarType::Str, VmValue::str("")));
                }
            }
            BstCommand::Integers { names, .. } => {
                for n in names {
                    self.globals.insert(n.clone(), (VarType::Int, VmValue::Int(0)));
                }
            }
            BstCommand::Read { .. } => self.read(),
            BstCommand::Execute { target, line } => {
                self.current = None;
                self.call_name(target, *line)?;
            }
            BstCommand::Iterate { target, line } => {
                for i in 0..self.entries.len() {
                    self.current = Some(i);
                    let result = self.call_name(target, *line);
                    self.current = None;
                    result?;
                }
            }
            BstCommand::Sort { .. } => {
                // Stable: equal keys keep their relative order.
                self.entries
                    .sort_by(|a, b| a.sort_key.as_bytes().cmp(b.sort_key.as_bytes()));
            }
        }
        Ok(())
    }

    /// Builds the entry list from the unique citations, first database hit wins.
    fn read(&mut self) {
        let dbs = self.dbs;
        for key in unique_citation_order(self.aux) {
            match dbs.iter().find_map(|db| db.lookup(&key)) {
                Some(entry) => self.entries.push(EntryState {
                    entry,
                    ints: vec![0; self.entry_ints.len()],
                    strs: vec![String::new(); self.entry_strs.len()],
                    sort_key: String::new(),
                }),
                None => self.log.log_warning(format!("no database entry for citation `{key}'")),
            }
        }
    }

    pub fn exec_tokens(&mut self, tokens: &[BstToken]) -> VmResult<()> {
        tokens.iter().try_for_each(|t| self.exec_token(t))
    }

    pub fn exec_token(&mut self, token: &BstToken) -> VmResult<()> {
        match &token.kind {
            TokenKind::Str(s) => self.stack.push(VmValue::Str(s.clone())),
            TokenKind::Int(i) => self.stack.push(VmValue::Int(*i)),
            TokenKind::Quoted(name) => self.stack.push(VmValue::Func(FuncRef::Named(name.clone()))),
            TokenKind::Block(body) => self.stack.push(VmValue::Func(FuncRef::Block(body.clone()))),
            TokenKind::Ident(name) => self.call_name(name, token.line)?,
        }
        Ok(())
    }

    pub(crate) fn call_func(&mut self, func: &FuncRef, line: usize) -> VmResult<()> {
        match func {
            FuncRef::Named(name) => self.call_name(name, line),
            FuncRef::Block(body) => self.exec_body(body.clone(), line),
        }
    }

    fn exec_body(&mut self, body: Arc<[BstToken]>, line: usize) -> VmResult<()> {
        if self.depth >= self.options.max_call_depth {
            return Err(VmError::new(
                line,
                format!("function calls nested deeper than {}", self.options.max_call_depth),
            ));
        }
        self.depth += 1;
        let result = self.exec_tokens(&body);
        self.depth -= 1;
        result
    }

    /// Resolves an identifier: entry field, entry variable, global, builtin,
    /// then user function.
    pub fn call_name(&mut self, name: &str, line: usize) -> VmResult<()> {
        if self.fields.iter().any(|f| f == name) {
            let Some(i) = self.current else {
                return Err(VmError::new(line, format!("field `{name}' used with no current entry")));
            };
            let entry = self.entries[i].entry;
            let value = match entry.get_field(name) {
                Some(v) => VmValue::str(v),
                None => VmValue::Missing {
                    field: name.to_string(),
                    entry: entry.key.clone(),
                },
            };
            self.stack.push(value);
            return Ok(());
        }
        if let Some(var) = self.entry_var(name) {
            let Some(i) = self.current else {
                return Err(VmError::new(
                    line,
                    format!("entry variable `{name}' used with no current entry"),
                ));
            };
            let e = &self.entries[i];
            let value = match var {
                EntryVar::SortKey => VmValue::str(e.sort_key.clone()),
                EntryVar::Int(k) => VmValue::Int(e.ints[k]),
                EntryVar::Str(k) => VmValue::str(e.strs[k].clone()),
            };
            self.stack.push(value);
            return Ok(());
        }
        if let Some((_, value)) = self.globals.get(name) {
            self.stack.push(value.clone());
            return Ok(());
        }
        if let Some(builtin) = builtins::lookup(name) {
            return builtin(self, line);
        }
        if let Some(body) = self.functions.get(name).cloned() {
            return self.exec_body(body, line);
        }
        if UNSUPPORTED_BUILTINS.contains(&name) {
            return Err(VmError::new(line, format!("unsupported builtin `{name}'")));
        }
        Err(VmError::new(line, format!("unknown identifier `{name}'")))
    }

    fn entry_var(&self, name: &str) -> Option<EntryVar> {
        if name == SORT_KEY {
            return Some(EntryVar::SortKey);
        }
        if let Some(k) = self.entry_ints.iter().position(|n| n == name) {
            return Some(EntryVar::Int(k));
        }
        self.entry_strs.iter().position(|n| n == name).map(EntryVar::Str)
    }

    /// Stores into a variable for `:=`.
    pub(crate) fn assign(&mut self, name: &str, value: VmValue, line: usize) -> VmResult<()> {
        let mismatch = |want: &str, got: &VmValue| {
            VmError::new(
                line,
                format!(":=: variable `{name}' holds {want}s, got {} {got}", got.type_name()),
            )
        };
        if let Some(var) = self.entry_var(name) {
            let Some(i) = self.current else {
                return Err(VmError::new(
                    line,
                    format!(":=: entry variable `{name}' can only be assigned while iterating over entries"),
                ));
            };
            let e = &mut self.entries[i];
            match (var, value) {
                (EntryVar::Int(k), VmValue::Int(v)) => e.ints[k] = v,
                (EntryVar::Int(_), other) => return Err(mismatch("integer", &other)),
                (EntryVar::SortKey, v) => e.sort_key = string_or(v).map_err(|v| mismatch("string", &v))?,
                (EntryVar::Str(k), v) => e.strs[k] = string_or(v).map_err(|v| mismatch("string", &v))?,
            }
            return Ok(());
        }
        let Some((ty, slot)) = self.globals.get_mut(name) else {
            return Err(VmError::new(line, format!(":=: `{name}' is not a variable")));
        };
        *slot = match (*ty, value) {
            (VarType::Int, VmValue::Int(v)) => VmValue::Int(v),
            (VarType::Int, other) => return Err(mismatch("integer", &other)),
            (VarType::Str, v) => VmValue::Str(string_or(v).map_err(|v| mismatch("string", &v))?),
        };
        Ok(())
    }
}

/// Strings pass through, missing fields read as empty, anything else is returned as the error.
fn string_or(value: VmValue) -> Result<String, VmValue> {
    match value {
        VmValue::Str(s) => Ok(s),
        VmValue::Missing { .. } => Ok(String::new()),
        other => Err(other),
    }
}

#[derive(Debug, Clone, Copy)]
enum EntryVar {
    SortKey,
    Int(usize),
    Str(usize),
}
