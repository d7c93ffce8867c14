import pytest

from cuspcorr import cache, cli, forms
from cuspcorr.errors import IntegrityError


def test_roundtrip_bit_identical(tmp_path):
    f = forms.build_form(18, 500)
    p = cache.write_cache(f, tmp_path / "k18.bin")
    g = cache.read_cache(p)
    assert g.a == f.a and g.weight == 18
    assert cache.encode(g.weight, g.a) == p.read_bytes()


def test_header(tmp_path):
    p = cache.write_cache(forms.build_delta(10), tmp_path / "d.bin")
    h = cache.read_header(p)
    assert (h.version, h.weight, h.ncoeffs) == (1, 12, 10)


def test_verify_1e5(tmp_path):
    p = cache.write_cache(forms.build_delta(10**5), tmp_path / "d.bin")
    res = cache.verify_cache(p, 0.01, seed=7)
    assert res["passed"] and res["checked"] == 1000 and not res["mismatches"]


def test_verify_detects_tampering(tmp_path):
    a = list(forms.build_delta(2000).a)
    a[1535] += 1  # 1536 = 2^9 * 3 is rebuilt from a(2), a(3)
    p = tmp_path / "bad.bin"
    p.write_bytes(cache.encode(12, a))
    res = cache.verify_cache(p, 1.0)
    assert not res["passed"] and 1536 in res["mismatches"]


def test_truncated_file_names_offset(tmp_path):
    data = cache.encode(12, forms.build_delta(50).a)
    p = tmp_path / "t.bin"
    p.write_bytes(data[:-3])
    with pytest.raises(IntegrityError, match="byte offset"):
        cache.read_cache(p)


@pytest.mark.parametrize("mutate,msg", [
    (lambda d: b"XXXX" + d[4:], "bad magic"),
    (lambda d: d[:4] + b"\x09\x00" + d[6:], "version"),
    (lambda d: d + b"\x00", "trailing"),
    (lambda d: d[:5], "shorter than header"),
])
def test_corruptions(mutate, msg):
    data = cache.encode(12, forms.build_delta(20).a)
    with pytest.raises(IntegrityError, match=msg):
        cache.decode(mutate(data))


def test_bad_sign_byte():
    data = bytearray(cache.encode(12, [1, -24]))
    data[16] = 7
    with pytest.raises(IntegrityError, match="sign byte.*offset 16"):
        cache.decode(bytes(data))


def test_cli_build_verify_info(tmp_path, capsys):
    p = str(tmp_path / "c.bin")
    assert cli.main(["cache", "build", "--path", p, "--weight", "16", "--N", "3000"]) == 0
    assert cli.main(["cache", "verify", "--path", p]) == 0
    assert cli.main(["cache", "info", "--path", p]) == 0
    assert '"weight": 16' in capsys.readouterr().out
    open(p, "r+b").truncate(100)
    assert cli.main(["cache", "verify", "--path", p]) == 3
    assert "byte offset" in capsys.readouterr().err
