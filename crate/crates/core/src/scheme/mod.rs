//! Setup, verification and the key/signature file formats. The interactive
//! signing phases live in [`session`].

mod session;

pub use session::{
    sign_local, sign_with_sources, Phase3Out, Phase5Out, PeriodSigner, RestartPayload, SignOutput, SignStats,
    session_seeds, SignerPhase, SignerSession, UserOutcome, UserPhase, UserResult, UserSession, View, MAX_RESTARTS, PHASE2_MAX_ITERATIONS,
};

use crate::codec::{pack_ternary, put_column, put_matrix, put_u32, read_bits, unpack_ternary, Reader};
use crate::error::{Error, Result};
use crate::hash::{challenge_hash, commit, in_challenge_ball, ternary_to_ints, BitString};
use crate::params::{ParamSpec, Params};
use crate::rng::RandomSource;
use crate::timetree::{leaf_path, node_matrix, NodeId, NodeKey, SecretKey, TreeMatrices};
use crate::trapdoor::trap_gen;
use crate::zq::{norm_sq, sub_vec_mod, IntMatrix, IntVector};

pub const PK_MAGIC: &[u8; 4] = b"FSPK";
pub const SK_MAGIC: &[u8; 4] = b"FSSK";
pub const SIG_MAGIC: &[u8; 4] = b"FSSG";
pub const FORMAT_VERSION: u8 = 1;

/// `pk = { A_0, A_i^(b), K }` together with the parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct PublicKey {
    pub params: Params,
    pub tree: TreeMatrices,
    pub k: IntMatrix,
}

impl PublicKey {
    /// Checks shapes against the parameters and that every entry is in `[0, q)`.
    pub fn check(&self) -> Result<()> {
        let p = &self.params;
        let q = p.modulus();
        let mut mats = vec![("A0", &self.tree.a0, p.m)];
        if self.tree.blocks.len() != p.ell as usize {
            return Err(Error::Format(format!("{} block pairs for depth {}", self.tree.blocks.len(), p.ell)));
        }
        for pair in &self.tree.blocks {
            mats.push(("A_i^(0)", &pair[0], p.m));
            mats.push(("A_i^(1)", &pair[1], p.m));
        }
        mats.push(("K", &self.k, p.k));
        for (name, mat, cols) in mats {
            if mat.shape() != (p.n, cols) {
                return Err(Error::Format(format!("{name} is {}x{}, expected {}x{cols}", mat.rows(), mat.cols(), p.n)));
            }
            if !mat.is_reduced(q) {
                return Err(Error::Format(format!("{name} has entries outside [0, q)")));
            }
        }
        Ok(())
    }

    /// `F_t` for the leaf of period `t`.
    pub fn period_matrix(&self, t: u64) -> Result<IntMatrix> {
        node_matrix(&self.tree, &leaf_path(t, self.params.ell)?)
    }
}

/// `Sigma = (d', e', z')`.
#[derive(Debug, Clone, PartialEq)]
pub struct Signature {
    pub d: BitString,
    pub e_prime: Vec<i8>,
    pub z: IntVector,
}

/// Runs `TrapGen`, samples the remaining public matrices and fixes `sigma`
/// from the measured trapdoor: `sigma = ceil(|T~_A0| * eta_slack)`. The
/// `sigma` in `spec` is ignored.
pub fn setup(spec: &ParamSpec, rng: &mut RandomSource) -> Result<(Params, PublicKey, SecretKey)> {
    let draft = spec.build()?;
    let q = draft.modulus();
    let pair = trap_gen(draft.n, q, draft.m, rng)?;
    let sigma = (pair.gs_norm * draft.eta_slack()).ceil();
    let params = draft.with_sigma(sigma)?;
    let blocks = (0..params.ell)
        .map(|_| {
            let b0 = IntMatrix::uniform_mod(params.n, params.m, q, rng);
            let b1 = IntMatrix::uniform_mod(params.n, params.m, q, rng);
            [b0, b1]
        })
        .collect();
    let k = IntMatrix::uniform_mod(params.n, params.k, q, rng);
    let tree = TreeMatrices { a0: pair.a.clone(), blocks };
    let root = NodeKey::from_verified(NodeId::root(), pair.t.clone());
    let sk = SecretKey::initial(params.ell, root)?;
    let pk = PublicKey { params: params.clone(), tree, k };
    Ok((params, pk, sk))
}

/// `Verify(pk, t, mu, Sigma)`. Never panics on untrusted input.
pub fn verify(pk: &PublicKey, t: u64, mu: &[u8], sig: &Signature) -> bool {
    let p = &pk.params;
    if t >= p.tau || sig.z.len() != p.total_width() || sig.d.len() != p.n {
        return false;
    }
    let e_prime = ternary_to_ints(&sig.e_prime);
    if !in_challenge_ball(&e_prime, p.k, p.kappa) {
        return false;
    }
    let bound = p.z_bound();
    if norm_sq(&sig.z) as f64 > bound * bound {
        return false;
    }
    let q = p.modulus();
    let Ok(f) = pk.period_matrix(t) else { return false };
    let (Ok(fz), Ok(ke)) = (f.mul_vec_mod(&sig.z, q), pk.k.mul_vec_mod(&e_prime, q)) else {
        return false;
    };
    let u = sub_vec_mod(&fz, &ke, q);
    let c = commit(mu, &sig.d, p.n);
    challenge_hash(&u, &c, p.k, p.kappa) == sig.e_prime
}

/// `"FSPK" | params text length u32 | params text | A_0 | A_1^(0) | A_1^(1) | ... | K`.
pub fn encode_public_key(pk: &PublicKey) -> Vec<u8> {
    let mut out = PK_MAGIC.to_vec();
    let text = pk.params.to_text();
    put_u32(&mut out, text.len() as u32);
    out.extend_from_slice(text.as_bytes());
    put_matrix(&mut out, &pk.tree.a0);
    for pair in &pk.tree.blocks {
        put_matrix(&mut out, &pair[0]);
        put_matrix(&mut out, &pair[1]);
    }
    put_matrix(&mut out, &pk.k);
    out
}

pub fn decode_public_key(bytes: &[u8]) -> Result<PublicKey> {
    let mut r = Reader::new(bytes);
    r.magic(PK_MAGIC)?;
    let len = r.u32()? as usize;
    let text = std::str::from_utf8(r.take(len)?).map_err(|_| Error::Format("params text is not UTF-8".into()))?;
    let params = Params::from_text(text)?;
    params.check()?;
    let a0 = r.matrix()?;
    let mut blocks = Vec::with_capacity(params.ell as usize);
    for _ in 0..params.ell {
        let b0 = r.matrix()?;
        let b1 = r.matrix()?;
        blocks.push([b0, b1]);
    }
    let k = r.matrix()?;
    r.finish()?;
    let pk = PublicKey { params, tree: TreeMatrices { a0, blocks }, k };
    pk.check()?;
    Ok(pk)
}

/// `"FSSK" | version u8 | t u32 | ell u8 | count u16 | per node: len u8,
/// path bits packed LE, basis block`. The empty post-final key has
/// `t = 2^ell` and no nodes.
pub fn encode_secret_key(sk: &SecretKey) -> Vec<u8> {
    let mut out = SK_MAGIC.to_vec();
    out.push(FORMAT_VERSION);
    put_u32(&mut out, sk.period() as u32);
    out.push(sk.ell());
    let nodes: Vec<&NodeKey> = sk.nodes().collect();
    out.extend_from_slice(&(nodes.len() as u16).to_le_bytes());
    for key in nodes {
        let bits = key.node().bits();
        out.push(bits.len() as u8);
        let mut packed = vec![0u8; bits.len().div_ceil(8)];
        for (i, &b) in bits.iter().enumerate() {
            packed[i / 8] |= (b as u8) << (i % 8);
        }
        out.extend_from_slice(&packed);
        put_matrix(&mut out, key.basis());
    }
    out
}

/// Decodes a secret key and re-verifies every node basis against `pk`.
pub fn decode_secret_key(bytes: &[u8], pk: &PublicKey) -> Result<SecretKey> {
    let mut r = Reader::new(bytes);
    r.magic(SK_MAGIC)?;
    let version = r.u8()?;
    if version != FORMAT_VERSION {
        return Err(Error::Format(format!("secret key version {version}")));
    }
    let t = r.u32()? as u64;
    let ell = r.u8()?;
    if ell != pk.params.ell {
        return Err(Error::Format(format!("secret key depth {ell}, public key depth {}", pk.params.ell)));
    }
    let count = r.u16()? as usize;
    let q = pk.params.modulus();
    let mut nodes = Vec::with_capacity(count.min(64));
    for _ in 0..count {
        let len = r.u8()? as usize;
        if len > ell as usize {
            return Err(Error::Format(format!("node of length {len} in a depth-{ell} tree")));
        }
        let packed = read_bits(&mut r, len, "node path")?;
        let node = NodeId::from_bits((0..len).map(|i| packed.bit(i)).collect());
        let basis = r.matrix()?;
        nodes.push(NodeKey::new(&pk.tree, q, node, basis)?);
    }
    r.finish()?;
    SecretKey::from_parts(ell, t, nodes)
}

/// `"FSSG" | version u8 | t u32 | d' | e' (2 bits per entry) | z' column block`.
pub fn encode_signature(t: u64, sig: &Signature) -> Vec<u8> {
    let mut out = SIG_MAGIC.to_vec();
    out.push(FORMAT_VERSION);
    put_u32(&mut out, t as u32);
    out.extend_from_slice(sig.d.as_bytes());
    out.extend_from_slice(&pack_ternary(&sig.e_prime));
    put_column(&mut out, &sig.z);
    out
}

/// Returns `(t, Sigma)`; field lengths come from `params`.
pub fn decode_signature(bytes: &[u8], params: &Params) -> Result<(u64, Signature)> {
    let mut r = Reader::new(bytes);
    r.magic(SIG_MAGIC)?;
    let version = r.u8()?;
    if version != FORMAT_VERSION {
        return Err(Error::Format(format!("signature version {version}")));
    }
    let t = r.u32()? as u64;
    let d = read_bits(&mut r, params.n, "d'")?;
    let e_prime = unpack_ternary(r.take(params.k.div_ceil(4))?, params.k)?;
    let z = r.column(params.total_width(), "z'")?;
    r.finish()?;
    Ok((t, Signature { d, e_prime, z }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::preset_spec;

    fn tiny() -> (Params, PublicKey, SecretKey) {
        setup(&preset_spec("toy-tiny").unwrap(), &mut RandomSource::from_seed([1; 32])).unwrap()
    }

    #[test]
    fn setup_shapes_and_determinism() {
        let (p, pk, sk) = tiny();
        pk.check().unwrap();
        assert_eq!(pk.tree.blocks.len(), p.ell as usize);
        assert_eq!(sk.node_ids(), vec![NodeId::root()]);
        let (_, pk2, _) = tiny();
        assert_eq!(encode_public_key(&pk), encode_public_key(&pk2));
    }

    #[test]
    fn key_files_round_trip() {
        let (_, pk, sk) = tiny();
        let pk2 = decode_public_key(&encode_public_key(&pk)).unwrap();
        assert_eq!(pk2, pk);
        let bytes = encode_secret_key(&sk);
        assert_eq!(decode_secret_key(&bytes, &pk).unwrap(), sk);
        let q = pk.params.modulus();
        let sk1 = crate::timetree::key_update(&pk.tree, q, sk).unwrap();
        assert_eq!(decode_secret_key(&encode_secret_key(&sk1), &pk).unwrap(), sk1);
    }

    #[test]
    fn signature_file_round_trip() {
        let (p, _, _) = tiny();
        let sig = Signature {
            d: BitString::from_bytes(p.n, vec![1]).unwrap(),
            e_prime: vec![1, 0, 0, -1, 0, 0, 0, 0],
            z: (0..p.total_width() as i64).map(|i| i * 1000 - 7).collect(),
        };
        let b = encode_signature(3, &sig);
        assert_eq!(decode_signature(&b, &p).unwrap(), (3, sig));
        assert!(decode_signature(&b[..b.len() - 2], &p).is_err());
    }
}
