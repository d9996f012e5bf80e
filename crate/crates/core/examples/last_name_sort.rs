//! Sorting on last names built with `num.names$` and `format.name$`.

use bstkit::vm::{Vm, VmOptions};
use bstkit::{parse_aux, parse_bib, parse_bst};

fn main() {
    let style = include_str!("../data/helloword.bst").replacen(
        "READ\n",
        &format!("READ\n{}", include_str!("../data/sort_by_last_name.bst")),
        1,
    );
    let (program, _) = parse_bst(&style, "lastname.bst");
    let aux = parse_aux("\\citation{Ulam-1964}\n\\citation{Poincare}\n").unwrap();
    let dbs = [parse_bib(include_str!("../data/my.bib"), "my.bib").0];

    // Step through commands by hand so the sort keys can be inspected.
    let mut vm = Vm::new(&aux, &dbs, VmOptions::default());
    for cmd in &program.commands {
        vm.execute_command(cmd).expect("style runs");
    }
    for e in vm.entries() {
        println!("{:<10} sort.key$ = {}", e.entry.key, e.sort_key);
    }
}
