import math
from collections import Counter

import pytest

from webintel.errors import UnparsableUrl
from webintel.lexical import (
    contains_ipv4,
    count_embedded_tlds,
    extract_lexical,
    parse_url,
    shannon_entropy,
)
from webintel.suffixes import PublicSuffixList


def entropy_oracle(s: str) -> float:
    # independent evaluation: natural log scaled to bits
    if not s:
        return 0.0
    n = len(s)
    return -sum((c / n) * math.log(c / n) for c in Counter(s).values()) / math.log(2)


class TestParseUrl:
    def test_multi_label_suffix(self, suffix_table):
        p = parse_url("http://a.b.example.co.uk/p?q=1", suffix_table)
        assert p.subdomains == ["a", "b"]
        assert p.second_level_domain == "example"
        assert p.suffix == "co.uk"
        assert p.hostname == "a.b.example.co.uk"
        assert p.path == "/p"
        assert p.query == "q=1"

    def test_ip_host(self, suffix_table):
        p = parse_url("http://192.168.0.1/x", suffix_table)
        assert p.is_ip_host
        assert p.hostname == "192.168.0.1"
        assert p.subdomains == []
        assert p.suffix == ""

    def test_bare_domain(self, suffix_table):
        p = parse_url("example.com", suffix_table)
        assert p.scheme == ""
        assert p.second_level_domain == "example"
        assert p.suffix == "com"

    def test_hostname_reassembles(self, suffix_table):
        for url in ("https://x.y.foo.co.uk", "http://foo.com", "http://a.b.c.d.bar.org/z"):
            p = parse_url(url, suffix_table)
            joined = ".".join(p.subdomains + [p.second_level_domain] + p.suffix.split("."))
            assert joined == p.hostname

    def test_userinfo_and_port(self, suffix_table):
        p = parse_url("http://user@ex.com:8080/a", suffix_table)
        assert p.hostname == "ex.com"
        assert p.path == "/a"

    def test_unknown_suffix(self, suffix_table):
        p = parse_url("http://example.zzz/", suffix_table)
        assert p.suffix == ""
        assert p.second_level_domain == "zzz"
        assert p.subdomains == ["example"]

    @pytest.mark.parametrize("bad", ["", "http://", "/relative/path", "http:///x"])
    def test_unparsable(self, bad, suffix_table):
        with pytest.raises(UnparsableUrl):
            parse_url(bad, suffix_table)


class TestEntropy:
    def test_single_symbol(self):
        assert shannon_entropy("aaaa") == 0.0

    def test_two_equiprobable(self):
        assert shannon_entropy("ab") == pytest.approx(1.0)

    def test_hand_value(self):
        # frequencies a:2 b:2 space:1 c:1 d:1 over n=7
        assert shannon_entropy("abab cd") == pytest.approx(2.2359, abs=1e-4)

    def test_empty(self):
        assert shannon_entropy("") == 0.0

    def test_matches_oracle_and_bounds(self, rng):
        alphabet = "abcdefgh012345-._/"
        for _ in range(50):
            n = int(rng.integers(1, 60))
            s = "".join(alphabet[i] for i in rng.integers(0, len(alphabet), n))
            h = shannon_entropy(s)
            assert h == pytest.approx(entropy_oracle(s), abs=1e-12)
            assert 0.0 <= h <= math.log2(len(set(s))) + 1e-12

    def test_permutation_invariant(self, rng):
        s = "http://ex.com/abc?x=12"
        perm = "".join(rng.permutation(list(s)))
        assert shannon_entropy(s) == pytest.approx(shannon_entropy(perm), abs=1e-12)


class TestEmbeddedTlds:
    def test_three_tld_labels(self, suffix_table):
        assert count_embedded_tlds("http://com.net.example.org/", suffix_table) == 3

    def test_suffix_only(self, suffix_table):
        assert count_embedded_tlds("http://example.org/", suffix_table) == 1

    def test_non_tld_labels(self, suffix_table):
        assert count_embedded_tlds("http://abcxyz.test123.example.org/", suffix_table) == 1


class TestExtractLexical:
    def test_query_chars(self, suffix_table):
        f = extract_lexical("https://ex.com/?a=1&b=2", suffix_table)
        assert f.equals_count == 2
        assert f.ampersand_count == 1
        assert f.query_count == 1
        assert f.zero_count == 0

    def test_at_symbol(self, suffix_table):
        f = extract_lexical("http://user@ex.com", suffix_table)
        assert f.at_count == 1
        assert f.at_in_url is True

    def test_domain_entropy(self, suffix_table):
        f = extract_lexical("http://abc.com", suffix_table)
        assert f.digits_to_domain_ratio == 0.0
        assert f.domain_entropy == pytest.approx(math.log2(3), abs=1e-9)

    def test_digit_ratio_identity(self, suffix_table, rng):
        urls = [
            "http://a1.example.com/p2?x=33",
            "https://10x.co.uk/",
            "http://abc.com",
            "http://192.168.0.1/x0",
        ]
        for url in urls:
            f = extract_lexical(url, suffix_table)
            digits = sum(ch.isdigit() for ch in url)
            assert f.digits_to_url_ratio * f.url_length == pytest.approx(digits, abs=1e-9)

    def test_at_and_ip_flags(self, suffix_table):
        corpus = [
            "http://ex.com",
            "http://user@ex.com",
            "http://192.168.0.1/a",
            "http://ex.com/path/192.168.0.1/x",
            "http://ex.com/v1.2.3.4000",
        ]
        for url in corpus:
            f = extract_lexical(url, suffix_table)
            assert f.at_in_url == (f.at_count >= 1)
            parts = parse_url(url, suffix_table)
            assert f.ip_in_url == (parts.is_ip_host or contains_ipv4(url))

    def test_oversized_octet_not_ip(self):
        assert not contains_ipv4("http://ex.com/v1.2.3.4000")
        assert contains_ipv4("http://ex.com/1.2.3.4/")

    def test_deterministic(self, suffix_table):
        url = "https://a.b.example.co.uk/p?q=1&r=2"
        assert extract_lexical(url, suffix_table) == extract_lexical(url, suffix_table)

    def test_subdomain_count_counts_labels(self, suffix_table):
        f = extract_lexical("http://a.b.example.co.uk/", suffix_table)
        assert f.subdomain_count == 2
        assert f.tld == "co.uk"
