#!/usr/bin/env python3
"""Generate the bundled demo lexicon TSV.

The core of the table is a hand-written list of common Chinese characters
with their real (tone-stripped) pinyin readings. To reach a few thousand
entries we pad with characters from the CJK Unified Ideographs block,
assigned round-robin to a pool of legal syllables. Padded readings are
synthetic: good enough for tests and synthetic corpora, where only the
syllable structure and homophone density matter, not true readings.

Run from the repository root:

    python3 tools/make_demo_lexicon.py > src/hotword_ranker/data/demo_lexicon.tsv
"""

import sys

# Real readings for common characters (tone-stripped, u-umlaut written "v").
CORE_ZH = """
北 bei 京 jing 南 nan 海 hai 上 shang 我 wo 你 ni 他 ta 她 ta 的 de 了 le
是 shi 在 zai 有 you 人 ren 中 zhong 国 guo 大 da 小 xiao 天 tian 地 di
好 hao 不 bu 一 yi 二 er 三 san 四 si 五 wu 六 liu 七 qi 八 ba 九 jiu
十 shi 百 bai 千 qian 万 wan 安 an 东 dong 西 xi 门 men 家 jia 学 xue
生 sheng 老 lao 师 shi 水 shui 火 huo 山 shan 日 ri 月 yue 明 ming
星 xing 电 dian 话 hua 车 che 路 lu 口 kou 手 shou 心 xin 爱 ai 欢 huan
迎 ying 用 yong 识 shi 别 bie 悲 bei 杯 bei 背 bei 贝 bei 被 bei 倍 bei
公 gong 司 si 王 wang 李 li 张 zhang 刘 liu 陈 chen 林 lin 黄 huang
周 zhou 吴 wu 徐 xu 孙 sun 马 ma 朱 zhu 胡 hu 郭 guo 何 he 高 gao
罗 luo 郑 zheng 梁 liang 谢 xie 宋 song 唐 tang 许 xu 邓 deng 冯 feng
韩 han 曹 cao 彭 peng 曾 zeng 萧 xiao 田 tian 董 dong 袁 yuan 潘 pan
蒋 jiang 蔡 cai 余 yu 杜 du 叶 ye 程 cheng 苏 su 魏 wei 吕 lv 丁 ding
任 ren 卢 lu 姚 yao 沈 shen 钟 zhong 姜 jiang 崔 cui 谭 tan 陆 lu
汪 wang 范 fan 金 jin 石 shi 廖 liao 贾 jia 夏 xia 韦 wei 傅 fu
方 fang 白 bai 邹 zou 孟 meng 熊 xiong 秦 qin 邱 qiu 江 jiang 尹 yin
薛 xue 闫 yan 段 duan 雷 lei 侯 hou 龙 long 史 shi 黎 li 贺 he 顾 gu
毛 mao 郝 hao 龚 gong 邵 shao 钱 qian 严 yan 覃 qin 武 wu 戴 dai
莫 mo 孔 kong 向 xiang 汤 tang 来 lai 去 qu 到 dao 说 shuo 看 kan
听 ting 写 xie 读 du 买 mai 卖 mai 开 kai 关 guan 出 chu 进 jin
前 qian 后 hou 左 zuo 右 you 时 shi 间 jian 年 nian 今 jin 昨 zuo
城 cheng 市 shi 区 qu 县 xian 镇 zhen 村 cun 街 jie 道 dao 广 guang
州 zhou 深 shen 圳 zhen 杭 hang 宁 ning 波 bo 温 wen 青 qing 岛 dao
济 ji 武 wu 汉 han 长 chang 沙 sha 成 cheng 都 du 重 zhong 庆 qing
西 xi 兰 lan 银 yin 川 chuan 太 tai 原 yuan 石 shi 庄 zhuang 福 fu
厦 xia 泉 quan 贵 gui 阳 yang 昆 kun 拉 la 萨 sa 乌 wu 鲁 lu 木 mu
齐 qi 哈 ha 尔 er 滨 bin 春 chun 阳 yang 辽 liao 吉 ji 黑 hei 河 he
风 feng 云 yun 雨 yu 雪 xue 花 hua 草 cao 树 shu 鸟 niao 鱼 yu 虫 chong
语 yu 音 yin 乐 yue 歌 ge 画 hua 书 shu 报 bao 纸 zhi 笔 bi 字 zi
词 ci 句 ju 文 wen 科 ke 技 ji 数 shu 据 ju 网 wang 络 luo 算 suan
机 ji 器 qi 智 zhi 能 neng 模 mo 型 xing 训 xun 练 lian 测 ce 试 shi
"""

INITIALS = ["zh", "ch", "sh", "b", "p", "m", "f", "d", "t", "n", "l",
            "g", "k", "h", "j", "q", "x", "r", "z", "c", "s", "y", "w"]

# Legal (approximate) finals per initial class, for padded syllables.
FINALS_COMMON = ["a", "e", "ai", "ei", "ao", "ou", "an", "en", "ang", "eng"]
FINALS_BY_INITIAL = {
    "j": ["i", "ia", "ie", "iao", "iu", "ian", "in", "iang", "ing", "iong", "v", "ve", "van", "vn"],
    "q": ["i", "ia", "ie", "iao", "iu", "ian", "in", "iang", "ing", "iong", "v", "ve", "van", "vn"],
    "x": ["i", "ia", "ie", "iao", "iu", "ian", "in", "iang", "ing", "iong", "v", "ve", "van", "vn"],
    "zh": FINALS_COMMON + ["i", "u", "ua", "uo", "uai", "ui", "uan", "un", "uang", "ong"],
    "ch": FINALS_COMMON + ["i", "u", "ua", "uo", "ui", "uan", "un", "uang", "ong"],
    "sh": FINALS_COMMON + ["i", "u", "ua", "uo", "uai", "ui", "uan", "un", "uang"],
    "r": ["e", "i", "ao", "ou", "an", "en", "ang", "eng", "u", "uo", "ui", "uan", "un", "ong"],
    "z": FINALS_COMMON + ["i", "u", "uo", "ui", "uan", "un", "ong"],
    "c": FINALS_COMMON + ["i", "u", "uo", "ui", "uan", "un", "ong"],
    "s": FINALS_COMMON + ["i", "u", "uo", "ui", "uan", "un", "ong"],
    "b": ["a", "o", "ai", "ei", "ao", "an", "en", "ang", "eng", "i", "ie", "iao", "ian", "in", "ing", "u"],
    "p": ["a", "o", "ai", "ei", "ao", "ou", "an", "en", "ang", "eng", "i", "ie", "iao", "ian", "in", "ing", "u"],
    "m": ["a", "o", "e", "ai", "ei", "ao", "ou", "an", "en", "ang", "eng", "i", "ie", "iao", "iu", "ian", "in", "ing", "u"],
    "f": ["a", "o", "ei", "ou", "an", "en", "ang", "eng", "u"],
    "y": ["i", "a", "e", "ao", "ou", "an", "in", "ang", "ing", "ong", "u", "ue", "uan", "un"],
    "w": ["u", "a", "o", "ai", "ei", "an", "en", "ang", "eng"],
}
for ini in ["d", "t", "n", "l", "g", "k", "h"]:
    extra = ["u", "uo", "ui", "uan", "un", "uang", "ong"]
    if ini in ("d", "t"):
        extra += ["i", "ie", "iao", "ian", "ing"]
    if ini in ("n", "l"):
        extra += ["i", "ie", "iao", "ian", "in", "iang", "ing", "v", "ve"]
    FINALS_BY_INITIAL[ini] = FINALS_COMMON + extra
ZERO_INITIAL = ["a", "ai", "an", "ang", "ao", "e", "ei", "en", "eng", "er", "o", "ou"]

EN_WORDS = """
whisper w ih s p er
model m aa d ah l
speech s p iy ch
audio ao d iy ow
python p ay th ah n
data d ey t ah
machine m ah sh iy n
learning l er n ih ng
network n eh t w er k
deep d iy p
neural n uh r ah l
open ow p ah n
source s ao r s
cloud k l aw d
server s er v er
mobile m ow b ah l
phone f ow n
video v ih d iy ow
music m y uw z ih k
game g ey m
email iy m ey l
internet ih n t er n eh t
browser b r aw z er
search s er ch
engine eh n jh ah n
system s ih s t ah m
software s ao f t w eh r
hardware h aa r d w eh r
robot r ow b aa t
smart s m aa r t
watch w aa ch
band b ae n d
live l ay v
stream s t r iy m
code k ow d
test t eh s t
train t r ey n
token t ow k ah n
vector v eh k t er
matrix m ey t r ih k s
signal s ih g n ah l
filter f ih l t er
sample s ae m p ah l
channel ch ae n ah l
layer l ey er
batch b ae ch
epoch eh p ah k
score s k ao r
rank r ae ng k
match m ae ch
query k w ih r iy
index ih n d eh k s
cache k ae sh
thread th r eh d
process p r aa s eh s
memory m eh m er iy
disk d ih s k
file f ay l
text t eh k s t
word w er d
list l ih s t
bank b ae ng k
"""


def core_entries():
    toks = CORE_ZH.split()
    seen = set()
    out = []
    for ch, py in zip(toks[::2], toks[1::2]):
        if ch not in seen:
            seen.add(ch)
            out.append((ch, py))
    return out


def padded_syllables():
    sylls = []
    for ini in INITIALS:
        for fin in FINALS_BY_INITIAL[ini]:
            sylls.append(ini + fin)
    sylls.extend(ZERO_INITIAL)
    return sorted(set(sylls))


def main():
    out = sys.stdout
    out.write("# Demo lexicon: hand-written core readings plus generated padding.\n")
    out.write("# Padding readings are synthetic; do not use as a pinyin reference.\n")
    entries = core_entries()
    used = {ch for ch, _ in entries}
    sylls = padded_syllables()
    cp = 0x4E00
    target = 3000
    i = 0
    while len(entries) < target:
        ch = chr(cp)
        cp += 1
        if ch in used:
            continue
        entries.append((ch, sylls[i % len(sylls)]))
        i += 1
    for ch, py in entries:
        out.write(f"zh\t{ch}\t{py}\n")

    lines = [ln for ln in EN_WORDS.strip().splitlines() if ln.strip()]
    for ln in lines:
        parts = ln.split()
        out.write(f"en\t{parts[0]}\t{' '.join(parts[1:])}\n")

    confusions = [
        ("zh", "z:0.7,j:0.3"), ("z", "zh:0.7,c:0.3"),
        ("ch", "c:0.7,q:0.3"), ("c", "ch:0.7,z:0.3"),
        ("sh", "s:0.7,x:0.3"), ("s", "sh:0.7,c:0.3"),
        ("n", "l:1.0"), ("l", "n:0.6,r:0.4"), ("f", "h:1.0"), ("h", "f:1.0"),
        ("an", "ang:1.0"), ("ang", "an:1.0"),
        ("en", "eng:1.0"), ("eng", "en:1.0"),
        ("in", "ing:1.0"), ("ing", "in:1.0"),
        ("ian", "iang:1.0"), ("iang", "ian:1.0"),
        ("uan", "uang:1.0"), ("uang", "uan:1.0"),
        ("ai", "ei:1.0"), ("ei", "ai:1.0"), ("o", "uo:1.0"), ("uo", "o:1.0"),
    ]
    for src, dst in confusions:
        out.write(f"conf\t{src}\t{dst}\n")


if __name__ == "__main__":
    main()
