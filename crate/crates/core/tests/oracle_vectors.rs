//! Known-answer checks against values frozen from OpenSSL, hashlib and zlib
//! (see fixtures/generate.py).

use disktrust::aes::{decrypt_block, encrypt_block, expand_key};
use disktrust::format::crc32;
use disktrust::kdf::{hmac_sha256, pbkdf2_hmac_sha256, sha256, KdfParams};
use disktrust::sector::{SectorIndex, XtsKeys};
use serde_json::Value;

fn oracle() -> Value {
    serde_json::from_str(include_str!("fixtures/oracle.json")).unwrap()
}

fn bytes(v: &Value) -> Vec<u8> {
    hex::decode(v.as_str().unwrap()).unwrap()
}

#[test]
fn aes_known_answers() {
    let o = oracle();
    let cases = o["aes_kat"].as_array().unwrap().iter().chain(o["aes_random"].as_array().unwrap());
    for case in cases {
        let ks = expand_key(&bytes(&case["key"])).unwrap();
        let pt: [u8; 16] = bytes(&case["pt"]).try_into().unwrap();
        let ct: [u8; 16] = bytes(&case["ct"]).try_into().unwrap();
        assert_eq!(encrypt_block(&ks, &pt), ct, "key {}", case["key"]);
        assert_eq!(decrypt_block(&ks, &ct), pt, "key {}", case["key"]);
    }
}

#[test]
fn fips197_appendix_c_values() {
    let pt = hex::decode("00112233445566778899aabbccddeeff").unwrap();
    let pt: [u8; 16] = pt.try_into().unwrap();
    for (len, ct) in [
        (16, "69c4e0d86a7b0430d8cdb78070b4c55a"),
        (24, "dda97ca4864cdfe06eaf70a0ec0d7191"),
        (32, "8ea2b7ca516745bfeafc49904b496089"),
    ] {
        let key: Vec<u8> = (0..len as u8).collect();
        let ks = expand_key(&key).unwrap();
        assert_eq!(hex::encode(encrypt_block(&ks, &pt)), ct);
    }
}

#[test]
fn xts_sectors() {
    let o = oracle();
    for case in o["xts"].as_array().unwrap() {
        let keys = XtsKeys::new(&bytes(&case["data_key"]), &bytes(&case["tweak_key"])).unwrap();
        let idx = SectorIndex(case["sector"].as_u64().unwrap());
        let pt: [u8; 512] = bytes(&case["pt"]).try_into().unwrap();
        let ct: [u8; 512] = bytes(&case["ct"]).try_into().unwrap();
        assert_eq!(keys.encrypt_sector(idx, &pt), ct, "sector {idx:?}");
        assert_eq!(keys.decrypt_sector(idx, &ct), pt, "sector {idx:?}");
    }
}

#[test]
fn ieee1619_vector4_prefix() {
    let keys = XtsKeys::new(
        &hex::decode("27182818284590452353602874713526").unwrap(),
        &hex::decode("31415926535897932384626433832795").unwrap(),
    )
    .unwrap();
    let mut pt = [0u8; 512];
    for (i, b) in pt.iter_mut().enumerate() {
        *b = i as u8;
    }
    let ct = keys.encrypt_sector(SectorIndex(0), &pt);
    assert_eq!(
        hex::encode(&ct[..32]),
        "27a7479befa1d476489f308cd4cfa6e2a96e4bbe3208ff25287dd3819616e89c"
    );
}

#[test]
fn sha256_vectors() {
    for case in oracle()["sha256"].as_array().unwrap() {
        let msg = bytes(&case["pattern"]).repeat(case["repeat"].as_u64().unwrap() as usize);
        assert_eq!(hex::encode(sha256(&msg)), case["digest"].as_str().unwrap());
    }
}

#[test]
fn hmac_vectors() {
    for case in oracle()["hmac_sha256"].as_array().unwrap() {
        let mac = hmac_sha256(&bytes(&case["key"]), &bytes(&case["msg"]));
        assert_eq!(hex::encode(mac), case["mac"].as_str().unwrap());
    }
}

#[test]
fn pbkdf2_vectors() {
    for case in oracle()["pbkdf2_hmac_sha256"].as_array().unwrap() {
        let params = KdfParams::new(
            bytes(&case["salt"]),
            case["iterations"].as_u64().unwrap() as u32,
            case["length"].as_u64().unwrap() as usize,
        )
        .unwrap();
        let key = pbkdf2_hmac_sha256(&bytes(&case["password"]), &params);
        assert_eq!(hex::encode(key), case["key"].as_str().unwrap());
    }
}

#[test]
fn crc32_vectors() {
    for case in oracle()["crc32"].as_array().unwrap() {
        assert_eq!(crc32(&bytes(&case["msg"])) as u64, case["crc"].as_u64().unwrap());
    }
}
