import pytest

from blogfluence.corpus import AccessRecord, BlogPost, Corpus

# 2008-09-01T00:00:00Z, a Monday.
BASE_TS = 1220227200


def make_post(user, serial, ts, body="alpha beta gamma", ip=None, themes=("diary",)):
    return BlogPost(
        hashed_ip=ip if ip is not None else f"ip-{user}",
        upload_ts=ts,
        user_id=user,
        url=f"/{user}/p{serial}",
        title=f"post {serial}",
        blog_name=f"blog-{user}",
        body=body,
        themes=tuple(themes),
    )


def make_access(ip, ts, request, referrer=""):
    return AccessRecord(hashed_ip=ip, access_ts=ts, request=request, referrer=referrer)


def make_corpus(posts, accesses):
    return Corpus.from_records(posts, accesses)


@pytest.fixture
def hour():
    return 3600
