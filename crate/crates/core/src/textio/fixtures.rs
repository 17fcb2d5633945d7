//! Built-in fixture documents.
//!
//! `L2` is the Boolean lattice over the three assessment generators, `L1`
//! the four-element diamond of influence degrees with two linearly ordered
//! branches, `L` their product (atoms ba0, b, bn0, 0c, 0d), and `M` a
//! Boolean confidence scale over three sources. The `hybrid-energy-map`
//! fixture is a synthesized five-concept map of a wind/photovoltaic energy
//! system with two expert weight matrices, the second deliberately giving
//! the wind turbine an implausible response to wind.

use super::{parse, Document, TextError};

const L1: &str = "\
lattice L1 {
  elems 0 c d h
  covers 0<c 0<d c<h d<h
  mult meet
}
";

const L2: &str = "\
lattice L2 {
  elems 0 ba0 b bn0 bora born aorn 1
  covers 0<ba0 0<b 0<bn0 ba0<bora b<bora b<born bn0<born ba0<aorn bn0<aorn bora<1 born<1 aorn<1
  mult meet
}
";

const M: &str = "\
lattice M {
  elems 0 s1 s2 s3 s12 s13 s23 1
  covers 0<s1 0<s2 0<s3 s1<s12 s2<s12 s1<s13 s3<s13 s2<s23 s3<s23 s12<1 s13<1 s23<1
  mult meet
}
";

const L: &str = "\
lattice L {
  product L2 L1
}
";

const HYBRID_MAP: &str = "\
map hybrid-energy-map {
  carrier L
  scale M
  concepts C1 C2 C3 C4 C5
  init C1 (1h, s12)
  init C2 (borah, s13)
  init C3 (bornh, s23)
  init C4 (0c, s1)
  init C5 (0d, s1)
  matrix W1 {
    cell C1 C1 (1c, s23)
    cell C2 C2 (borac, s13)
    cell C3 C3 (1h, s23)
    cell C1 C4 (1h, s12)
    cell C2 C4 (borah, s3)
    cell C3 C5 (1h, s23)
  }
  matrix W2 {
    cell C1 C1 (1c, s23)
    cell C2 C2 (borac, s13)
    cell C3 C3 (1c, s12)
    cell C1 C4 (1h, s12)
    cell C3 C5 (bn0c, s23)
  }
}
";

/// Names accepted by [`load_fixture`].
pub fn fixture_names() -> &'static [&'static str] {
    &["L1", "L2", "L", "M", "hybrid-energy-map"]
}

/// A built-in document by name. `L` includes its components; the map
/// fixture includes every lattice it mentions.
pub fn load_fixture(name: &str) -> Result<Document, TextError> {
    let text = match name {
        "L1" => L1.to_string(),
        "L2" => L2.to_string(),
        "M" => M.to_string(),
        "L" => format!("{L1}{L2}{L}"),
        "hybrid-energy-map" => format!("{L1}{L2}{L}{M}{HYBRID_MAP}"),
        other => return Err(TextError::UnknownFixture(other.to_string())),
    };
    parse(&text)
}
