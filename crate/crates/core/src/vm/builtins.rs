use super::{string_or, FuncRef, Vm, VmError, VmResult, VmValue};
use crate::names;

pub(super) type Builtin = fn(&mut Vm<'_>, usize) -> VmResult<()>;

pub(super) fn lookup(name: &str) -> Option<Builtin> {
    let f: Builtin = match name {
        "write$" => write,
        "newline$" => newline,
        "cite$" => cite,
        "empty$" => empty,
        "skip$" => skip,
        "if$" => if_,
        "while$" => while_,
        "*" => concat,
        ":=" => assign,
        "num.names$" => num_names,
        "format.name$" => format_name,
        "=" => equals,
        "<" => less,
        ">" => greater,
        "+" => plus,
        "-" => minus,
        "call.type$" => call_type,
        _ => return None,
    };
    Some(f)
}

impl Vm<'_> {
    fn pop(&mut self, builtin: &str, line: usize) -> VmResult<VmValue> {
        self.stack
            .pop()
            .ok_or_else(|| VmError::new(line, format!("{builtin}: stack underflow")))
    }

    fn pop_int(&mut self, builtin: &str, line: usize) -> VmResult<i64> {
        match self.pop(builtin, line)? {
            VmValue::Int(i) => Ok(i),
            other => Err(type_error(builtin, "an integer", &other, line)),
        }
    }

    /// Pops a string; a missing field reads as "".
    fn pop_str(&mut self, builtin: &str, line: usize) -> VmResult<String> {
        let v = self.pop(builtin, line)?;
        string_or(v).map_err(|other| type_error(builtin, "a string", &other, line))
    }

    fn pop_func(&mut self, builtin: &str, line: usize) -> VmResult<FuncRef> {
        match self.pop(builtin, line)? {
            VmValue::Func(f) => Ok(f),
            other => Err(type_error(builtin, "a function", &other, line)),
        }
    }

    fn current_index(&self, builtin: &str, line: usize) -> VmResult<usize> {
        self.current
            .ok_or_else(|| VmError::new(line, format!("{builtin}: no current entry (only valid inside ITERATE)")))
    }
}

fn type_error(builtin: &str, want: &str, got: &VmValue, line: usize) -> VmError {
    VmError::new(
        line,
        format!("{builtin}: expected {want}, found {} {got}", got.type_name()),
    )
}

fn write(vm: &mut Vm<'_>, line: usize) -> VmResult<()> {
    match vm.pop("write$", line)? {
        VmValue::Str(s) => vm.bbl.append(&s),
        VmValue::Missing { field, entry } => vm
            .log
            .log_warning(format!("`{field}' is a missing field, not a string, for entry {entry}")),
        other => return Err(type_error("write$", "a string", &other, line)),
    }
    Ok(())
}

fn newline(vm: &mut Vm<'_>, _line: usize) -> VmResult<()> {
    vm.bbl.flush_line();
    Ok(())
}

fn cite(vm: &mut Vm<'_>, line: usize) -> VmResult<()> {
    let i = vm.current_index("cite$", line)?;
    let key = vm.entries[i].entry.key.clone();
    vm.stack.push(VmValue::Str(key));
    Ok(())
}

fn empty(vm: &mut Vm<'_>, line: usize) -> VmResult<()> {
    let result = match vm.pop("empty$", line)? {
        VmValue::Missing { .. } => true,
        VmValue::Str(s) => s.trim().is_empty(),
        other => return Err(type_error("empty$", "a string", &other, line)),
    };
    vm.stack.push(VmValue::Int(result as i64));
    Ok(())
}

fn skip(_vm: &mut Vm<'_>, _line: usize) -> VmResult<()> {
    Ok(())
}

fn if_(vm: &mut Vm<'_>, line: usize) -> VmResult<()> {
    let else_branch = vm.pop_func("if$", line)?;
    let then_branch = vm.pop_func("if$", line)?;
    let cond = vm.pop_int("if$", line)?;
    let branch = if cond > 0 { then_branch } else { else_branch };
    vm.call_func(&branch, line)
}

fn while_(vm: &mut Vm<'_>, line: usize) -> VmResult<()> {
    let body = vm.pop_func("while$", line)?;
    let predicate = vm.pop_func("while$", line)?;
    let mut iterations = 0u64;
    loop {
        vm.call_func(&predicate, line)?;
        if vm.pop_int("while$", line)? <= 0 {
            return Ok(());
        }
        if iterations >= vm.options.while_limit {
            return Err(VmError::new(
                line,
                format!(
                    "while$: loop did not terminate within {} iterations",
                    vm.options.while_limit
                ),
            ));
        }
        iterations += 1;
        vm.call_func(&body, line)?;
    }
}

fn concat(vm: &mut Vm<'_>, line: usize) -> VmResult<()> {
    let b = vm.pop_str("*", line)?;
    let mut a = vm.pop_str("*", line)?;
    a.push_str(&b);
    vm.stack.push(VmValue::Str(a));
    Ok(())
}

fn assign(vm: &mut Vm<'_>, line: usize) -> VmResult<()> {
    let target = match vm.pop(":=", line)? {
        VmValue::Func(FuncRef::Named(name)) => name,
        other => return Err(type_error(":=", "a quoted variable name", &other, line)),
    };
    let value = vm.pop(":=", line)?;
    vm.assign(&target, value, line)
}

fn num_names(vm: &mut Vm<'_>, line: usize) -> VmResult<()> {
    let list = vm.pop_str("num.names$", line)?;
    vm.stack.push(VmValue::Int(names::num_names(&list) as i64));
    Ok(())
}

fn format_name(vm: &mut Vm<'_>, line: usize) -> VmResult<()> {
    let template = vm.pop_str("format.name$", line)?;
    let index = vm.pop_int("format.name$", line)?;
    let list = vm.pop_str("format.name$", line)?;
    let all = names::split_names(&list);
    let entry = match vm.current {
        Some(i) => format!(" for entry {}", vm.entries[i].entry.key),
        None => String::new(),
    };
    if index < 1 || index as usize > all.len() {
        return Err(VmError::new(
            line,
            format!("format.name$: there is no name {index} in \"{list}\"{entry}"),
        ));
    }
    let formatted = names::format_name(&all[index as usize - 1], &template)
        .map_err(|e| VmError::new(line, format!("format.name$: {e}{entry}")))?;
    vm.stack.push(VmValue::Str(formatted));
    Ok(())
}

fn equals(vm: &mut Vm<'_>, line: usize) -> VmResult<()> {
    let b = vm.pop("=", line)?;
    let a = vm.pop("=", line)?;
    let eq = match (a, b) {
        (VmValue::Int(x), VmValue::Int(y)) => x == y,
        (a @ (VmValue::Str(_) | VmValue::Missing { .. }), b @ (VmValue::Str(_) | VmValue::Missing { .. })) => {
            string_or(a).ok() == string_or(b).ok()
        }
        (a, b) => {
            return Err(VmError::new(
                line,
                format!("=: cannot compare {} {a} with {} {b}", a.type_name(), b.type_name()),
            ))
        }
    };
    vm.stack.push(VmValue::Int(eq as i64));
    Ok(())
}

fn int_binop(vm: &mut Vm<'_>, line: usize, name: &str, op: fn(i64, i64) -> Option<i64>) -> VmResult<()> {
    let b = vm.pop_int(name, line)?;
    let a = vm.pop_int(name, line)?;
    let r = op(a, b).ok_or_else(|| VmError::new(line, format!("{name}: integer overflow")))?;
    vm.stack.push(VmValue::Int(r));
    Ok(())
}

fn less(vm: &mut Vm<'_>, line: usize) -> VmResult<()> {
    int_binop(vm, line, "<", |a, b| Some((a < b) as i64))
}

fn greater(vm: &mut Vm<'_>, line: usize) -> VmResult<()> {
    int_binop(vm, line, ">", |a, b| Some((a > b) as i64))
}

fn plus(vm: &mut Vm<'_>, line: usize) -> VmResult<()> {
    int_binop(vm, line, "+", i64::checked_add)
}

fn minus(vm: &mut Vm<'_>, line: usize) -> VmResult<()> {
    int_binop(vm, line, "-", i64::checked_sub)
}

fn call_type(vm: &mut Vm<'_>, line: usize) -> VmResult<()> {
    let i = vm.current_index("call.type$", line)?;
    let entry_type = vm.entries[i].entry.entry_type.clone();
    match vm.functions.get(&entry_type).cloned() {
        Some(body) => vm.exec_body(body, line),
        None => {
            vm.log
                .log_warning(format!("no handler function for entry type `{entry_type}'"));
            Ok(())
        }
    }
}
