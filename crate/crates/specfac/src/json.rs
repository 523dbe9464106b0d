//! Canonical JSON text: two-space indentation, keys in the order the value
//! holds them (sorted for maps), every float as `{:.16e}` (17 significant
//! digits, round-trip exact) and non-finite floats as `null`.

use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter, Serializer};

struct Canonical<'a>(PrettyFormatter<'a>);

macro_rules! delegate {
    ($($name:ident($($arg:ident: $ty:ty),*);)*) => {
        $(fn $name<W: ?Sized + io::Write>(&mut self, w: &mut W $(, $arg: $ty)*) -> io::Result<()> {
            self.0.$name(w $(, $arg)*)
        })*
    };
}

impl Formatter for Canonical<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(w, "{value:.16e}")
        } else {
            w.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(value))
    }

    delegate! {
        begin_array();
        end_array();
        begin_array_value(first: bool);
        end_array_value();
        begin_object();
        end_object();
        begin_object_key(first: bool);
        begin_object_value();
        end_object_value();
    }
}

/// Serialize with the canonical formatter, plus a trailing newline.
pub fn to_canonical_string<T: Serialize + ?Sized>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = Serializer::with_formatter(&mut buf, Canonical(PrettyFormatter::with_indent(b"  ")));
    value.serialize(&mut ser).expect("serializing to memory cannot fail");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn floats_are_fixed_width_and_exact() {
        let text = to_canonical_string(&json!({"b": [0.1, -2.0, f64::NAN], "a": 3}));
        assert_eq!(text, "{\n  \"a\": 3,\n  \"b\": [\n    1.0000000000000001e-1,\n    -2.0000000000000000e0,\n    null\n  ]\n}\n");
        for x in [0.1, 1.0 / 3.0, 5e-324, f64::MAX, -1e-300] {
            let s = to_canonical_string(&x);
            assert_eq!(s.trim().parse::<f64>().unwrap(), x);
        }
    }
}
