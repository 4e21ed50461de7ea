package app;

class Greeter {
    String greet(String name) {
        return Strings.shout("hello " + name);
    }
}
