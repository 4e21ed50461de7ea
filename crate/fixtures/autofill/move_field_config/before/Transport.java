public class Transport {
    private int timeout;

    void write(String body, int timeout) {
        this.timeout = timeout;
        System.out.println(body);
    }
}
