//! SORT on the raw author string: "H. Poincar\'e" files under H, ahead of "Stein".

use bstkit::{parse_aux, parse_bib, parse_bst, run};

fn main() {
    let style = include_str!("../data/helloword.bst").replacen(
        "READ\n",
        &format!("READ\n{}", include_str!("../data/sort_by_author.bst")),
        1,
    );
    let (program, _) = parse_bst(&style, "sorted.bst");
    let aux = parse_aux("\\citation{Ulam-1964}\n\\citation{Poincare}\n").unwrap();
    let (db, _) = parse_bib(include_str!("../data/my.bib"), "my.bib");

    let out = run(&program, &aux, &[db]);
    println!("order: {:?}", out.entry_keys);
    print!("{}", out.bbl_text());
}
