package app;

import app.text.Strings;

class Greeter {
    String greet(String name) {
        return Strings.shout("hello " + name);
    }
}
