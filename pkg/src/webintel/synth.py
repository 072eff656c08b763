"""Synthetic labeled corpus with class signal injected into every cascade.

The generator builds real page artifacts (HTML, scripts, stylesheets,
robots bodies, passive-DNS histories, host records), so the full
extraction pipeline runs end to end. Each feature family carries
progressively stronger class information: lexical features separate the
nine classes only coarsely, robots and content features sharpen the
picture, passive DNS more so, and the host features (registrar above
all) are nearly class-determining. Accuracy should therefore climb as
cascades are added.
"""

from __future__ import annotations

import numpy as np

from .records import FetchedPage, HostIntel, Label, LabeledSample, PassiveDnsRecord

LABEL_ORDER = tuple(Label)
DEFAULT_CLASS_COUNTS = (1400, 950, 800, 650, 500, 350, 200, 100, 50)

_TLDS = ["com", "net", "org", "xyz", "top", "info", "biz", "club", "online"]
_COUNTRIES = ["US", "DE", "RU", "CN", "BR"]
_SHARED_REGISTRARS = ["NameBridge Inc", "DomainPort LLC", "RegistryOne"]
_WORDS = [
    "alpha", "panel", "secure", "login", "mail", "cdn", "static", "portal",
    "update", "files", "assets", "shop", "news", "api", "img", "data",
]

SUSPICIOUS_ASNS = frozenset({"AS666"})
FALSE_POSITIVE_ASNS = frozenset({"AS100"})


def _counts_for(n: int) -> list[int]:
    total = sum(DEFAULT_CLASS_COUNTS)
    counts = [max(1, round(c * n / total)) for c in DEFAULT_CLASS_COUNTS]
    while sum(counts) > n:
        counts[int(np.argmax(counts))] -= 1
    while sum(counts) < n:
        counts[int(np.argmin(counts))] += 1
    return counts


def _word(rng) -> str:
    return _WORDS[rng.integers(0, len(_WORDS))]


def _token(rng, length: int, digit_p: float) -> str:
    letters = "abcdefghijklmnopqrstuvwxyz"
    digits = "0123456789"
    chars = [
        digits[rng.integers(0, 10)] if rng.random() < digit_p else letters[rng.integers(0, 26)]
        for _ in range(max(1, length))
    ]
    return "".join(chars)


def _make_url(c: int, i: int, rng) -> str:
    scheme = "https" if rng.random() < 0.85 - 0.04 * c else "http"
    tld = _TLDS[c] if rng.random() < 0.45 else _TLDS[rng.integers(0, len(_TLDS))]
    sld = _token(rng, 5 + c % 4 + rng.integers(0, 4), digit_p=0.03 * c)
    n_subs = int(c % 3 + (rng.random() < 0.3))
    subs = [_word(rng) for _ in range(n_subs)]
    host = ".".join(subs + [sld, tld])
    path_parts = [_word(rng) for _ in range(1 + c % 3)] + [f"p{i}"]
    path = "/".join(path_parts)
    n_params = int(c % 4 + (rng.random() < 0.4))
    query = "&".join(f"{_word(rng)}={_token(rng, 3, 0.4)}" for _ in range(n_params))
    url = f"{scheme}://{host}/{path}"
    if query:
        url += f"?{query}"
    if rng.random() < 0.04 * c:
        url += "_" + _token(rng, 2, 0.5)
    return url


def _make_robots(c: int, rng) -> str | None:
    if rng.random() > 0.25 + 0.08 * c:
        return None
    lines = ["User-agent: *"]
    for _ in range(rng.poisson(1 + 0.8 * c)):
        lines.append(f"Disallow: /{_word(rng)}")
    if rng.random() < 0.1 + 0.09 * c:
        lines.append("Disallow: /")
    for _ in range(rng.poisson(0.5 + 0.3 * (8 - c))):
        lines.append(f"Allow: /{_word(rng)}")
    for _ in range(rng.poisson(0.4 * c)):
        lines.append(f"# {_word(rng)} note")
    for _ in range(rng.poisson(0.3 + 0.35 * c)):
        lines.append(f"Sitemap: https://maps.example.com/{_word(rng)}.xml")
    return "\n".join(lines) + "\n"


def _make_html(c: int, url: str, rng) -> tuple[str, list, list]:
    # content intensity is keyed modulo 5: classes five apart look alike
    # here and get separated by the passive-DNS and host families instead
    ck = c % 5
    head = []
    body = []
    external_css = []
    external_js = []

    for j in range(rng.poisson(0.25 + 0.25 * ck)):
        href = f"https://cdn-assets.example.net/{_word(rng)}{j}.css"
        head.append(f'<link rel="stylesheet" href="{href}">')
        decls = [f".x{i}{{margin:{i}px}}" for i in range(rng.poisson(2 + 0.7 * ck))]
        decls += [".h{display:none}"] * rng.poisson(0.4 * ck)
        external_css.append((href, "\n".join(decls)))

    style_rules = [f".c{i}{{color:#333;padding:{i}px}}" for i in range(rng.poisson(1 + 0.8 * ck))]
    style_rules += [".hide{visibility:hidden}"] * rng.poisson(0.4 * ck)
    if style_rules:
        head.append("<style>" + "".join(style_rules) + "</style>")

    for j in range(rng.poisson(0.3 + 0.3 * ck)):
        src = f"https://cdn-assets.example.net/{_word(rng)}{j}.js"
        body.append(f'<script src="{src}"></script>')
        calls = ["helper();"] * rng.poisson(2 + 0.6 * ck)
        calls += ["eval(payload);"] * rng.poisson(0.45 * ck)
        arr = "var t=[" + ",".join(str(i) for i in range(1 + rng.poisson(0.5 * ck))) + "];"
        external_js.append((src, arr + "".join(calls)))

    inline = ["function refresh(){render();}"]
    inline += [f"track({i});" for i in range(rng.poisson(1 + 0.35 * ck))]
    inline += ["eval(atob(blob));"] * rng.poisson(0.45 * ck)
    inline += ["document.write(banner);"] * rng.poisson(0.3 * ck)
    inline += ["window.open(promo);"] * rng.poisson(0.18 * ck)
    arr_len = 1 + rng.poisson(0.6 * ck)
    inline.append("var a=[" + ",".join(str(i) for i in range(arr_len)) + "];")
    body.append("<script>" + "".join(inline) + "</script>")

    for j in range(rng.poisson(2 + 0.8 * ck)):
        body.append(f'<a href="https://ref{j % (ck + 2)}.example.org/{_word(rng)}">link</a>')
    for j in range(rng.poisson(0.45 * ck)):
        body.append(f'<img src="https://imghost{j}.example-cdn.net/{_word(rng)}.png">')
    if rng.random() < 0.35:
        body.append(f'<img src="/local/{_word(rng)}.png">')

    if ck >= 3 and rng.random() < 0.1 + 0.1 * (ck - 3):
        blob = "".join("0123456789abcdef"[rng.integers(0, 16)] for _ in range(16 + 8 * ck))
        body.append(f"<div>{blob}</div>")

    filler = " ".join(_word(rng) for _ in range(rng.poisson(20 + 10 * ck)))
    html = (
        "<html><head>" + "".join(head) + "</head><body>"
        + "".join(body) + f"<p>{filler}</p></body></html>"
    )
    return html, external_js, external_css


def _make_pdns(c: int, host: str, rng) -> list[PassiveDnsRecord]:
    n = int(rng.poisson(3 + 2.6 * c))
    records = []
    asn_pool = [f"AS{200 + c}", f"AS{300 + c}"]
    if c >= 4 and rng.random() < 0.6:
        asn_pool.append("AS666")
    if c <= 2 and rng.random() < 0.5:
        asn_pool.append("AS100")
    switch_p = 0.05 + 0.11 * c
    country_pool = [_COUNTRIES[(c + j) % len(_COUNTRIES)] for j in range(1 + c % 4)]
    asn = asn_pool[0]
    for j in range(n):
        if rng.random() < switch_p:
            asn = asn_pool[rng.integers(0, len(asn_pool))]
        first = 1_500_000_000 + j * 86_400 + int(rng.integers(0, 1000))
        records.append(
            PassiveDnsRecord(
                hostname=host if rng.random() < 0.7 else f"{_word(rng)}.{host}",
                ip=f"10.{c}.{rng.integers(0, 2 + c)}.{rng.integers(1, 250)}",
                asn=asn,
                country=(country_pool[rng.integers(0, len(country_pool))] if rng.random() < 0.88 else _COUNTRIES[rng.integers(0, len(_COUNTRIES))]),
                first_seen=float(first),
                last_seen=float(first + int(rng.integers(0, 86_400))),
            )
        )
    return records


def _make_host(c: int, url: str, page_https: bool, rng) -> HostIntel:
    if rng.random() < 0.93:
        registrar = f"Registrar-{LABEL_ORDER[c].value}"
    else:
        registrar = _SHARED_REGISTRARS[rng.integers(0, len(_SHARED_REGISTRARS))]
    country = _COUNTRIES[c % len(_COUNTRIES)] if rng.random() < 0.85 else _COUNTRIES[rng.integers(0, len(_COUNTRIES))]
    n_ips = 1 + int(c % 3) + int(rng.random() < 0.3)
    tld = url.split("/", 3)[2].rsplit(".", 1)[-1]
    return HostIntel(
        resolved_ips=[f"192.0.{c}.{10 + j}" for j in range(n_ips)],
        country=country,
        whois_complete=rng.random() < 0.85 - 0.07 * c,
        https=page_https,
        registrar=registrar,
        tld=tld,
    )


def synth_samples(n: int = 5000, seed: int = 42) -> list[LabeledSample]:
    """Generate ``n`` synthetic labeled samples across all nine classes."""
    rng = np.random.default_rng(seed)
    counts = _counts_for(n)
    samples = []
    for c, count in enumerate(counts):
        for i in range(count):
            url = _make_url(c, len(samples), rng)
            html, ext_js, ext_css = _make_html(c, url, rng)
            host = url.split("/", 3)[2]
            page = FetchedPage(
                final_url=url,
                https=url.startswith("https://"),
                html=html,
                external_js=ext_js,
                external_css=ext_css,
                robots_body=_make_robots(c, rng),
                fetched_at=1_700_000_000.0,
            )
            samples.append(
                LabeledSample(
                    url=url,
                    label=LABEL_ORDER[c],
                    page=page,
                    pdns_records=_make_pdns(c, host, rng),
                    host_intel=_make_host(c, url, page.https, rng),
                )
            )
    order = rng.permutation(len(samples))
    return [samples[i] for i in order]
