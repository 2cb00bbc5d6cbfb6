import pytest

from statemigrate.keccak import keccak256, keccak256_int

# published Keccak-256 digests (original padding, as used by Ethereum)
VECTORS = [
    (b"", "c5d2460186f7233c927e7db2dcc703c0e500b653ca82273b7bfad8045d85a470"),
    (b"abc", "4e03657aea45a94fc7d47ba826c8d667c0d1e6e33a64a036ec44f58fa12d6c45"),
    (b"The quick brown fox jumps over the lazy dog",
     "4d741b6f1eb29cb2a9b9911c82f56fa8d73b04959d3d9d222895df6c0b28aa15"),
    (b"abcdefghbcdefghicdefghijdefghijkefghijklfghijklmghijklmnhijklmnoijklmnopjklmnopqklmnopqrlmnopqrsmnopqrstnopqrstu",
     "f519747ed599024f3882238e5ab43960132572b7345fbeb9a90769dafd21ad67"),
]

MILLION_A = "fadae6b49f129bbb812be8407b7b2894f34aecf6dbd1f9b0f0c7e9853098fc96"


@pytest.mark.parametrize("data, digest", VECTORS)
def test_published_vectors(data, digest):
    assert keccak256(data).hex() == digest


def test_million_a_multi_block():
    # 1,000,000 bytes is 7353 absorb blocks plus a partial one
    assert keccak256(b"a" * 1_000_000).hex() == MILLION_A


@pytest.mark.parametrize("n", [0, 1, 55, 56, 135, 136, 137, 200, 271, 272, 273, 1000])
def test_block_boundaries_against_pycryptodome(n):
    keccak = pytest.importorskip("Crypto.Hash.keccak")
    data = bytes((i * 7 + 3) % 256 for i in range(n))
    h = keccak.new(digest_bits=256)
    h.update(data)
    assert keccak256(data) == h.digest()


def test_int_form_is_big_endian():
    assert keccak256_int(b"abc") == int(VECTORS[1][1], 16)


def test_accepts_bytearray_and_memoryview():
    assert keccak256(bytearray(b"abc")) == keccak256(memoryview(b"abc")) == keccak256(b"abc")
