//! Serde adapters for the wire format: complex scalars as [re, im] pairs.

pub(crate) mod c64 {
    use crate::C64;
    use serde::{Serialize, Serializer};

    pub fn serialize<S: Serializer>(z: &C64, s: S) -> Result<S::Ok, S::Error> {
        [z.re, z.im].serialize(s)
    }
}

pub(crate) mod c64_opt {
    use crate::C64;
    use serde::{Serialize, Serializer};

    pub fn serialize<S: Serializer>(z: &Option<C64>, s: S) -> Result<S::Ok, S::Error> {
        match z {
            Some(z) => [z.re, z.im].serialize(s),
            None => s.serialize_none(),
        }
    }
}
