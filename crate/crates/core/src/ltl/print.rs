use super::ast::Formula;

/// Prints a formula so that [`super::parse`] rebuilds the same tree.
///
/// Binary nodes are always parenthesized. Prefix operators skip their own
/// parentheses when the operand already brings a pair.
pub fn to_text(f: &Formula) -> String {
    let mut out = String::new();
    write(f, &mut out);
    out
}

fn write(f: &Formula, out: &mut String) {
    match f {
        Formula::True => out.push_str("true"),
        Formula::Atom(a) => out.push_str(a),
        Formula::Not(inner) => {
            out.push('!');
            if matches!(**inner, Formula::True | Formula::Atom(_)) || inner.is_binary() {
                write(inner, out);
            } else {
                out.push('(');
                write(inner, out);
                out.push(')');
            }
        }
        Formula::Next(inner) => temporal("X", inner, out),
        Formula::Finally(inner) => temporal("F", inner, out),
        Formula::Globally(inner) => temporal("G", inner, out),
        Formula::And(l, r) => binary(l, "&", r, out),
        Formula::Or(l, r) => binary(l, "|", r, out),
        Formula::Implies(l, r) => binary(l, "->", r, out),
        Formula::Until(l, r) => binary(l, "U", r, out),
    }
}

fn temporal(op: &str, inner: &Formula, out: &mut String) {
    out.push_str(op);
    out.push(' ');
    if inner.is_binary() {
        write(inner, out);
    } else {
        out.push('(');
        write(inner, out);
        out.push(')');
    }
}

fn binary(l: &Formula, op: &str, r: &Formula, out: &mut String) {
    out.push('(');
    write(l, out);
    out.push(' ');
    out.push_str(op);
    out.push(' ');
    write(r, out);
    out.push(')');
}
