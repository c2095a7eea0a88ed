//! Serde adapters mapping nalgebra types onto the plain-array wire format
//! used by every file this crate reads or writes.

pub mod vec3 {
    use nalgebra::Vector3;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &Vector3<f64>, s: S) -> Result<S::Ok, S::Error> {
        [v.x, v.y, v.z].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vector3<f64>, D::Error> {
        let a = <[f64; 3]>::deserialize(d)?;
        Ok(Vector3::new(a[0], a[1], a[2]))
    }
}

pub mod point3 {
    use nalgebra::Point3;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(p: &Point3<f64>, s: S) -> Result<S::Ok, S::Error> {
        [p.x, p.y, p.z].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Point3<f64>, D::Error> {
        let a = <[f64; 3]>::deserialize(d)?;
        Ok(Point3::new(a[0], a[1], a[2]))
    }
}

/// Unit quaternions as `[x, y, z, w]`, renormalised on read.
pub mod unit_quat {
    use nalgebra::{Quaternion, UnitQuaternion};
    use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(q: &UnitQuaternion<f64>, s: S) -> Result<S::Ok, S::Error> {
        [q.i, q.j, q.k, q.w].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<UnitQuaternion<f64>, D::Error> {
        let a = <[f64; 4]>::deserialize(d)?;
        let q = Quaternion::new(a[3], a[0], a[1], a[2]);
        if q.norm() < 1e-9 {
            return Err(de::Error::custom("zero-norm quaternion"));
        }
        Ok(UnitQuaternion::from_quaternion(q))
    }
}
