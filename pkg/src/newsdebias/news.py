"""Generic news article fetcher with a pluggable HTML extractor."""

from __future__ import annotations

from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from html.parser import HTMLParser
from urllib.parse import urlparse

import requests


class FetchError(Exception):
    pass


class InvalidURL(FetchError, ValueError):
    pass


class NetworkError(FetchError):
    pass


class FetchTimeout(FetchError):
    pass


class HTTPStatusError(FetchError):
    def __init__(self, url: str, status: int):
        super().__init__(f"{url}: HTTP {status}")
        self.url = url
        self.status = status


class NotFound(HTTPStatusError):
    pass


class ExtractionError(FetchError):
    pass


@dataclass(frozen=True)
class NewsArticle:
    url: str
    title: str
    body: str
    fetched_at: datetime

    def to_dict(self) -> dict:
        return {"url": self.url, "title": self.title, "body": self.body, "fetched_at": self.fetched_at.isoformat()}


class _ArticleParser(HTMLParser):
    _SKIP = {"script", "style", "noscript", "nav", "footer", "header", "aside"}
    _VOID = {"br", "img", "hr", "input", "link", "wbr", "source", "area", "col", "embed"}

    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.title = ""
        self.og_title = ""
        self.h1 = ""
        self.paragraphs: list[str] = []
        self._stack: list[str] = []
        self._skip = 0
        self._buf: list[str] = []

    def handle_starttag(self, tag, attrs):
        if tag == "meta":
            a = dict(attrs)
            if a.get("property") == "og:title" and a.get("content"):
                self.og_title = a["content"].strip()
            return
        if tag in self._VOID:
            if tag == "br":
                self.handle_data(" ")
            return
        if tag in self._SKIP:
            self._skip += 1
        if tag in ("title", "h1", "p"):
            self._buf = []
        self._stack.append(tag)

    def handle_endtag(self, tag):
        if tag in self._SKIP and self._skip:
            self._skip -= 1
        if tag in ("title", "h1", "p"):
            text = " ".join("".join(self._buf).split())
            if tag == "title" and not self.title:
                self.title = text
            elif tag == "h1" and not self.h1 and not self._skip:
                self.h1 = text
            elif tag == "p" and text and not self._skip:
                self.paragraphs.append(text)
            self._buf = []
        if tag in self._stack:
            while self._stack and self._stack.pop() != tag:
                pass

    def handle_data(self, data):
        if any(t in ("title", "h1", "p") for t in self._stack):
            self._buf.append(data)


def extract_html(html: str) -> tuple[str, str]:
    """Title and paragraph body from an article page."""
    parser = _ArticleParser()
    parser.feed(html)
    parser.close()
    title = parser.og_title or parser.h1 or parser.title
    body = "\n\n".join(parser.paragraphs)
    if not body:
        raise ExtractionError("no article paragraphs found")
    return title, body


@dataclass(frozen=True)
class ClientConfig:
    timeout: float = 10.0
    user_agent: str = "newsdebias/0.1"
    max_concurrency: int = 4
    extractor: Callable[[str], tuple[str, str]] = extract_html


def fetch_article(url: str, config: ClientConfig = ClientConfig()) -> NewsArticle:
    parsed = urlparse(url)
    if parsed.scheme not in ("http", "https") or not parsed.netloc:
        raise InvalidURL(f"not an http(s) URL: {url!r}")
    try:
        resp = requests.get(url, timeout=config.timeout, headers={"User-Agent": config.user_agent})
    except requests.Timeout as exc:
        raise FetchTimeout(f"{url}: timed out after {config.timeout}s") from exc
    except requests.RequestException as exc:
        raise NetworkError(f"{url}: {exc}") from exc
    if resp.status_code == 404:
        raise NotFound(url, 404)
    if not 200 <= resp.status_code < 300:
        raise HTTPStatusError(url, resp.status_code)
    try:
        title, body = config.extractor(resp.text)
    except ExtractionError as exc:
        raise ExtractionError(f"{url}: {exc}") from exc
    return NewsArticle(url, title, body, datetime.now(timezone.utc))


def fetch_articles(urls: Sequence[str], config: ClientConfig = ClientConfig()) -> list[NewsArticle | FetchError]:
    """Fetch in parallel (at most ``config.max_concurrency`` at once); failures come back in place."""

    def one(url: str) -> NewsArticle | FetchError:
        try:
            return fetch_article(url, config)
        except FetchError as exc:
            return exc

    with ThreadPoolExecutor(max_workers=max(1, config.max_concurrency)) as pool:
        return list(pool.map(one, urls))
