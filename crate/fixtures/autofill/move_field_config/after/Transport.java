public class Transport {
    private int lastTimeout;

    void write(String body, int timeout) {
        this.lastTimeout = timeout;
        System.out.println(body);
    }
}
