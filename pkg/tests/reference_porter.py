"""Independent reference stemmer used only by the test suite.

Deliberately a near-literal transliteration of Martin Porter's own C
program (the ANSI version with the bli/logi rules and the length <= 2
guard), keeping its buffer, k/j indices, and switch-on-letter dispatch,
so that it shares no structure with the table-driven implementation in
venuerec.text.  Agreement between the two is what the tests check.
"""


class _Stemmer:
    def __init__(self, word):
        self.b = list(word)
        self.k = len(word) - 1
        self.j = 0

    def cons(self, i):
        ch = self.b[i]
        if ch in "aeiou":
            return False
        if ch == "y":
            return True if i == 0 else not self.cons(i - 1)
        return True

    def m(self):
        n = 0
        i = 0
        while True:
            if i > self.j:
                return n
            if not self.cons(i):
                break
            i += 1
        i += 1
        while True:
            while True:
                if i > self.j:
                    return n
                if self.cons(i):
                    break
                i += 1
            i += 1
            n += 1
            while True:
                if i > self.j:
                    return n
                if not self.cons(i):
                    break
                i += 1
            i += 1

    def vowelinstem(self):
        for i in range(self.j + 1):
            if not self.cons(i):
                return True
        return False

    def doublec(self, j):
        if j < 1:
            return False
        if self.b[j] != self.b[j - 1]:
            return False
        return self.cons(j)

    def cvc(self, i):
        if i < 2 or not self.cons(i) or self.cons(i - 1) or not self.cons(i - 2):
            return False
        return self.b[i] not in "wxy"

    def ends(self, s):
        length = len(s)
        if length > self.k + 1:
            return False
        if self.b[self.k - length + 1 : self.k + 1] != list(s):
            return False
        self.j = self.k - length
        return True

    def setto(self, s):
        length = len(s)
        self.b[self.j + 1 : self.j + 1 + length] = list(s)
        del self.b[self.j + 1 + length :]
        self.k = self.j + length

    def r(self, s):
        if self.m() > 0:
            self.setto(s)

    def step1ab(self):
        if self.b[self.k] == "s":
            if self.ends("sses"):
                self.k -= 2
            elif self.ends("ies"):
                self.setto("i")
            elif self.b[self.k - 1] != "s":
                self.k -= 1
        if self.ends("eed"):
            if self.m() > 0:
                self.k -= 1
        elif (self.ends("ed") or self.ends("ing")) and self.vowelinstem():
            self.k = self.j
            del self.b[self.k + 1 :]
            if self.ends("at"):
                self.setto("ate")
            elif self.ends("bl"):
                self.setto("ble")
            elif self.ends("iz"):
                self.setto("ize")
            elif self.doublec(self.k):
                self.k -= 1
                if self.b[self.k] in "lsz":
                    self.k += 1
            elif self.m() == 1 and self.cvc(self.k):
                self.setto("e")

    def step1c(self):
        if self.ends("y") and self.vowelinstem():
            self.b[self.k] = "i"

    def step2(self):
        ch = self.b[self.k - 1]
        if ch == "a":
            if self.ends("ational"):
                self.r("ate")
            elif self.ends("tional"):
                self.r("tion")
        elif ch == "c":
            if self.ends("enci"):
                self.r("ence")
            elif self.ends("anci"):
                self.r("ance")
        elif ch == "e":
            if self.ends("izer"):
                self.r("ize")
        elif ch == "l":
            if self.ends("bli"):
                self.r("ble")
            elif self.ends("alli"):
                self.r("al")
            elif self.ends("entli"):
                self.r("ent")
            elif self.ends("eli"):
                self.r("e")
            elif self.ends("ousli"):
                self.r("ous")
        elif ch == "o":
            if self.ends("ization"):
                self.r("ize")
            elif self.ends("ation"):
                self.r("ate")
            elif self.ends("ator"):
                self.r("ate")
        elif ch == "s":
            if self.ends("alism"):
                self.r("al")
            elif self.ends("iveness"):
                self.r("ive")
            elif self.ends("fulness"):
                self.r("ful")
            elif self.ends("ousness"):
                self.r("ous")
        elif ch == "t":
            if self.ends("aliti"):
                self.r("al")
            elif self.ends("iviti"):
                self.r("ive")
            elif self.ends("biliti"):
                self.r("ble")
        elif ch == "g":
            if self.ends("logi"):
                self.r("log")

    def step3(self):
        ch = self.b[self.k]
        if ch == "e":
            if self.ends("icate"):
                self.r("ic")
            elif self.ends("ative"):
                self.r("")
            elif self.ends("alize"):
                self.r("al")
        elif ch == "i":
            if self.ends("iciti"):
                self.r("ic")
        elif ch == "l":
            if self.ends("ical"):
                self.r("ic")
            elif self.ends("ful"):
                self.r("")
        elif ch == "s":
            if self.ends("ness"):
                self.r("")

    def step4(self):
        ch = self.b[self.k - 1]
        if ch == "a":
            if not self.ends("al"):
                return
        elif ch == "c":
            if not self.ends("ance") and not self.ends("ence"):
                return
        elif ch == "e":
            if not self.ends("er"):
                return
        elif ch == "i":
            if not self.ends("ic"):
                return
        elif ch == "l":
            if not self.ends("able") and not self.ends("ible"):
                return
        elif ch == "n":
            if self.ends("ant"):
                pass
            elif self.ends("ement"):
                pass
            elif self.ends("ment"):
                pass
            elif self.ends("ent"):
                pass
            else:
                return
        elif ch == "o":
            if self.ends("ion") and self.j >= 0 and self.b[self.j] in "st":
                pass
            elif self.ends("ou"):
                pass
            else:
                return
        elif ch == "s":
            if not self.ends("ism"):
                return
        elif ch == "t":
            if not self.ends("ate") and not self.ends("iti"):
                return
        elif ch == "u":
            if not self.ends("ous"):
                return
        elif ch == "v":
            if not self.ends("ive"):
                return
        elif ch == "z":
            if not self.ends("ize"):
                return
        else:
            return
        if self.m() > 1:
            self.k = self.j

    def step5(self):
        self.j = self.k
        if self.b[self.k] == "e":
            a = self.m()
            if a > 1 or (a == 1 and not self.cvc(self.k - 1)):
                self.k -= 1
        if self.b[self.k] == "l" and self.doublec(self.k) and self.m() > 1:
            self.k -= 1

    def stem(self):
        if self.k <= 1:
            return "".join(self.b)
        self.step1ab()
        self.step1c()
        self.step2()
        self.step3()
        self.step4()
        self.step5()
        return "".join(self.b[: self.k + 1])


def reference_stem(word):
    return _Stemmer(word).stem()
